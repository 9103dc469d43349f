"""Service layer for managing suites."""

from typing import Any, Dict, List

from fastmcp import FastMCP

from quantum_cycles.geometry.errors import ScenarioError
from quantum_cycles.interfaces.tool import SuiteReport, Tool, ToolContent, ToolResponse
from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)


class ToolService:
    """Service for managing and executing suites."""

    def __init__(self):
        self._tools: Dict[str, Tool] = {}

    def register_tool(self, tool: Tool) -> None:
        """Register a new suite."""
        logger.debug(f"Registering tool: {tool.name}")
        self._tools[tool.name] = tool

    def register_tools(self, tools: List[Tool]) -> None:
        """Register multiple suites."""
        logger.debug(f"Registering {len(tools)} tools")
        for tool in tools:
            self.register_tool(tool)

    @property
    def names(self) -> List[str]:
        return sorted(self._tools)

    def get_tool(self, tool_name: str) -> Tool:
        """Get a suite by name, accepting the short form without ``_suite``.

        Raises:
            ScenarioError: If no suite has that name
        """
        for key in (tool_name, f"{tool_name}_suite"):
            if key in self._tools:
                return self._tools[key]
        raise ScenarioError(f"Unknown suite {tool_name!r}; available: {', '.join(self.names)}")

    def validate_input(self, tool_name: str, input_data: Dict[str, Any]):
        """Validate parameters against the suite's input model.

        Raises:
            ValidationError: If the parameters are invalid
        """
        return self.get_tool(tool_name).input_model.model_validate(input_data)

    def run_tool(self, tool_name: str, input_data: Dict[str, Any]) -> SuiteReport:
        """Run a suite synchronously; used by scenario runs on worker threads."""
        tool = self.get_tool(tool_name)
        logger.debug(f"Running tool: {tool.name} with input: {input_data}")
        return tool.run_safely(self.validate_input(tool.name, input_data))

    async def execute_tool(self, tool_name: str, input_data: Dict[str, Any]) -> ToolResponse:
        """Execute a suite by name with given arguments.

        Args:
            tool_name: The name of the suite to execute
            input_data: Dictionary of input arguments for the suite

        Returns:
            The suite's response wrapping its report

        Raises:
            ScenarioError: If the suite is not found
            ValidationError: If the input data is invalid
        """
        logger.debug(f"Executing tool: {tool_name} with input: {input_data}")
        tool = self.get_tool(tool_name)
        result = await tool.execute(self.validate_input(tool.name, input_data))
        logger.debug(f"Tool {tool.name} execution completed")
        return result

    def _process_tool_content(self, content: ToolContent) -> Any:
        if content.type == "text":
            return content.text
        if content.type == "json" and content.json_data is not None:
            return content.json_data
        return content.text or content.json_data or {}

    def _serialize_response(self, response: ToolResponse) -> Any:
        """Serialize a ToolResponse to return to the client."""
        if not response.content:
            return {}
        if len(response.content) == 1:
            return self._process_tool_content(response.content[0])
        return [self._process_tool_content(content) for content in response.content]

    def register_mcp_handlers(self, mcp: FastMCP) -> None:
        """Register all suites as MCP handlers."""
        for tool in self._tools.values():

            def create_handler(tool_instance: Tool):
                # the input model as annotation gives FastMCP the full nested schema
                async def handler(input_data: tool_instance.input_model):
                    result = await self.execute_tool(tool_instance.name, input_data.model_dump())
                    return self._serialize_response(result)

                handler.__doc__ = tool_instance.description
                return handler

            mcp.tool(name=tool.name, description=tool.description)(create_handler(tool))
