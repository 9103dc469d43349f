from .scenario import ScenarioIndexResource, ScenarioResource

__all__ = ["ScenarioIndexResource", "ScenarioResource"]
