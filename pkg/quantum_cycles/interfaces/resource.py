"""Interfaces for read-only resources (bundled scenarios)."""

from abc import ABC, abstractmethod
from typing import Any, ClassVar, Dict, List, Optional, Type

from pydantic import BaseModel, ConfigDict, Field


class BaseResourceInput(BaseModel):
    """Base class for resource input models."""

    model_config = ConfigDict(extra="forbid")


class ResourceContent(BaseModel):
    """Model for content in resource responses."""

    text: str
    uri: Optional[str] = Field(None, description="URI of the resource")
    mime_type: Optional[str] = Field(None, description="MIME type of the resource")


class ResourceResponse(BaseModel):
    """Model for resource responses."""

    content: List[ResourceContent]

    @classmethod
    def from_text(cls, text: str, uri: Optional[str] = None, mime_type: Optional[str] = None) -> "ResourceResponse":
        return cls(content=[ResourceContent(text=text, uri=uri, mime_type=mime_type)])


class Resource(ABC):
    """Abstract base class for all resources."""

    name: ClassVar[str]
    description: ClassVar[str]
    uri: ClassVar[str]
    mime_type: ClassVar[Optional[str]] = None
    input_model: ClassVar[Type[BaseResourceInput]] = BaseResourceInput

    @abstractmethod
    async def read(self, input_data: BaseResourceInput) -> ResourceResponse:
        """Read the resource for the given URI parameters."""

    def get_schema(self) -> Dict[str, Any]:
        """Get JSON schema for the resource."""
        schema = {"name": self.name, "description": self.description, "uri": self.uri}
        if self.mime_type:
            schema["mime_type"] = self.mime_type
        schema["input"] = self.input_model.model_json_schema()
        return schema
