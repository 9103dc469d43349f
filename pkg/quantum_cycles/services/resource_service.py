"""Service layer for managing resources."""

import inspect
import re
from typing import Dict, List

from fastmcp import FastMCP

from quantum_cycles.geometry.errors import ScenarioError
from quantum_cycles.interfaces.resource import Resource, ResourceResponse
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)


def _pattern_regex(pattern: str) -> str:
    """``scenario://{name}`` -> ``^scenario://(?P<name>[^/]+)$``."""
    return "^" + re.sub(r"\\\{([^}]+)\\\}", r"(?P<\1>[^/]+)", re.escape(pattern)) + "$"


class ResourceService:
    """Service for managing and reading resources."""

    def __init__(self):
        self._resources: Dict[str, Resource] = {}
        self._uri_patterns: Dict[str, Resource] = {}

    def register_resource(self, resource: Resource) -> None:
        logger.debug(f"Registering resource: {resource.name} with URI: {resource.uri}")
        self._uri_patterns[resource.uri] = resource
        if "{" not in resource.uri:
            self._resources[resource.uri] = resource

    def register_resources(self, resources: List[Resource]) -> None:
        logger.debug(f"Registering {len(resources)} resources")
        for resource in resources:
            self.register_resource(resource)

    def get_resource(self, uri: str) -> Resource:
        """Get a resource by exact URI or by the first matching pattern.

        Raises:
            ScenarioError: If nothing matches
        """
        if uri in self._resources:
            return self._resources[uri]
        for pattern, resource in self._uri_patterns.items():
            if re.match(_pattern_regex(pattern), uri):
                return resource
        raise ScenarioError(f"Resource not found: {uri}")

    def extract_params_from_uri(self, pattern: str, uri: str) -> Dict[str, str]:
        match = re.match(_pattern_regex(pattern), uri)
        return match.groupdict() if match else {}

    async def read(self, uri: str) -> ResourceResponse:
        """Read a resource by concrete URI."""
        resource = self.get_resource(uri)
        params = self.extract_params_from_uri(resource.uri, uri)
        return await resource.read(resource.input_model(**params))

    def create_handler(self, resource: Resource, uri_pattern: str):
        """Create a handler whose signature lists the URI parameters."""
        uri_params = re.findall(r"\{([^}]+)\}", uri_pattern)

        if not uri_params:

            async def static_handler() -> str:
                response = await resource.read(resource.input_model())
                return response.content[0].text

            static_handler.__name__ = resource.name
            static_handler.__doc__ = resource.description
            return static_handler

        sig = inspect.Signature(
            [inspect.Parameter(p, inspect.Parameter.POSITIONAL_OR_KEYWORD, annotation=str) for p in uri_params]
        )

        async def param_handler(*args, **kwargs) -> str:
            bound = sig.bind(*args, **kwargs)
            response = await resource.read(resource.input_model(**bound.arguments))
            return response.content[0].text

        param_handler.__signature__ = sig.replace(return_annotation=str)
        param_handler.__name__ = resource.name
        param_handler.__doc__ = resource.description
        param_handler.__annotations__ = {**{p: str for p in uri_params}, "return": str}
        return param_handler

    def register_mcp_handlers(self, mcp: FastMCP) -> None:
        """Register all resources as MCP handlers."""
        for uri_pattern, resource in self._uri_patterns.items():
            mcp.resource(
                uri=uri_pattern,
                name=resource.name,
                description=resource.description,
                mime_type=resource.mime_type,
            )(self.create_handler(resource, uri_pattern))
