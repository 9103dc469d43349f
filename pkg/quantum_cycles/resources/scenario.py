"""Bundled scenario files published as MCP resources."""

import json

from pydantic import Field

from quantum_cycles.interfaces.resource import BaseResourceInput, Resource, ResourceResponse
from quantum_cycles.services.scenario_service import bundled_scenarios, bundled_text


class ScenarioResourceInput(BaseResourceInput):
    name: str = Field(..., description="Bundled scenario name, e.g. sphere-k3")


class ScenarioResource(Resource):
    """TOML text of one bundled scenario."""

    name = "scenario"
    description = "Bundled scenario file (TOML) that can be passed to the run and sweep commands."
    uri = "scenario://{name}"
    mime_type = "application/toml"
    input_model = ScenarioResourceInput

    async def read(self, input_data: ScenarioResourceInput) -> ResourceResponse:
        return ResourceResponse.from_text(
            bundled_text(input_data.name), uri=f"scenario://{input_data.name}", mime_type=self.mime_type
        )


class ScenarioIndexResource(Resource):
    name = "scenario_index"
    description = "Names of the bundled scenarios."
    uri = "scenarios://index"
    mime_type = "application/json"

    async def read(self, input_data: BaseResourceInput) -> ResourceResponse:
        return ResourceResponse.from_text(json.dumps(bundled_scenarios()), uri=self.uri, mime_type=self.mime_type)
