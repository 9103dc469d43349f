"""FastMCP middleware that times requests and suite calls."""

import time
from typing import Any

from fastmcp.server.middleware import Middleware, MiddlewareContext

from quantum_cycles.utils.logger import get_debug_logger

logger = get_debug_logger(__name__)


class RequestLoggingMiddleware(Middleware):
    """Logs every MCP message with its duration; suite calls also log their arguments."""

    async def on_message(self, context: MiddlewareContext, call_next) -> Any:
        start = time.perf_counter()
        method = context.method
        logger.debug(f"[REQUEST] Method: {method} | Source: {getattr(context, 'source', 'unknown')}")
        try:
            result = await call_next(context)
        except Exception as e:
            elapsed = (time.perf_counter() - start) * 1000
            logger.debug(f"[ERROR] Method: {method} | Duration: {elapsed:.2f}ms | Error: {type(e).__name__}: {e}")
            raise
        elapsed = (time.perf_counter() - start) * 1000
        logger.debug(f"[RESPONSE] Method: {method} | Duration: {elapsed:.2f}ms | Status: SUCCESS")
        return result

    async def on_call_tool(self, context: MiddlewareContext, call_next) -> Any:
        """Suites can take seconds; log which one runs with which parameters."""
        name = getattr(context.message, "name", "?")
        arguments = getattr(context.message, "arguments", None) or {}
        logger.debug(f"[SUITE] {name} | arguments: {arguments}")
        start = time.perf_counter()
        result = await call_next(context)
        logger.debug(f"[SUITE] {name} finished in {time.perf_counter() - start:.2f}s")
        return result
