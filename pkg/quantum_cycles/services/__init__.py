"""Service layer: suite registry, bundled resources and scenario runs."""
