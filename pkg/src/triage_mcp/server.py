"""
Triage MCP - MCP Server

FastMCP server exposing the triage pipeline as tools.

Features:
- 6 tools across 3 categories (diagnosis, findings, evaluation)
- Dual transport support (HTTP for remote, stdio for local)
- Lazy loading via TOOL_CATEGORIES environment variable
- MCP annotations (readOnlyHint, destructiveHint)

Usage:
  # stdio mode (local)
  triage-mcp

  # HTTP mode (remote deployment)
  triage-mcp --transport http --port 8000

  # Only the finding tools
  TOOL_CATEGORIES=findings triage-mcp
"""

import json
import logging
import os

from fastmcp import FastMCP

from . import __version__
from .runtime import get_backend, get_config
from .tools import get_all_tools, get_requested_categories, is_lazy_loading_enabled

logger = logging.getLogger(__name__)

SERVER_NAME = "triage-mcp"
SERVER_INSTRUCTIONS = """
Integration test failure triage.

Point diagnose_bundle at the log directory a failed test left behind to get
a root-cause finding with links to the relevant log lines. Record developer
feedback on findings and read engagement metrics. run_evaluation measures
accuracy on generated failures with known root causes.

Categories: diagnosis, findings, evaluation (configurable via TOOL_CATEGORIES)
"""

TOOL_ANNOTATIONS = {
    "diagnose_bundle": {"readOnlyHint": False, "destructiveHint": False},
    "build_diagnosis_prompt": {"readOnlyHint": True},
    "get_finding": {"readOnlyHint": True},
    "record_finding_feedback": {"destructiveHint": False},
    "get_feedback_metrics": {"readOnlyHint": True},
    "run_evaluation": {"readOnlyHint": True},
}

mcp = FastMCP(
    name=SERVER_NAME,
    version=__version__,
    instructions=SERVER_INSTRUCTIONS,
)


def register_tools(server: FastMCP = mcp) -> list[str]:
    """Register the tools of the requested categories with their annotations."""
    tools = get_all_tools()
    for tool_func in tools:
        tool_name = tool_func.__name__
        server.tool(
            name=tool_name,
            annotations=TOOL_ANNOTATIONS.get(tool_name, {}),
        )(tool_func)

    logger.info("Registered %d tools", len(tools))
    if is_lazy_loading_enabled():
        logger.info("Categories: %s", ", ".join(get_requested_categories()))
    return [tool.__name__ for tool in tools]


REGISTERED_TOOLS = register_tools()


@mcp.tool(
    name="get_server_info",
    annotations={"readOnlyHint": True},
)
async def get_server_info() -> str:
    """
    Get triage server information.

    Returns server version, loaded categories and the active backend and
    budget configuration. Useful for verifying server setup.
    """
    config = get_config()
    info = {
        "server": SERVER_NAME,
        "version": __version__,
        "backend": get_backend().name,
        "model_name": config.backend.model_name,
        "budget_tokens": config.budget_tokens,
        "lazy_loading_enabled": is_lazy_loading_enabled(),
        "loaded_categories": get_requested_categories(),
        "tools": REGISTERED_TOOLS + ["get_server_info"],
        "store_dir": str(config.store_dir),
    }
    return json.dumps(info, indent=2)


def main(argv: list[str] | None = None) -> None:
    """Main entry point for the triage MCP server."""
    import argparse

    from dotenv import load_dotenv

    from .cli import configure_logging

    load_dotenv()
    parser = argparse.ArgumentParser(description="Triage MCP Server")
    parser.add_argument(
        "--transport",
        choices=["stdio", "http"],
        default="stdio",
        help="Transport mode (default: stdio)",
    )
    parser.add_argument(
        "--host",
        default=os.environ.get("HOST", "0.0.0.0"),
        help="HTTP host (default: 0.0.0.0)",
    )
    parser.add_argument(
        "--port",
        type=int,
        default=int(os.environ.get("PORT", "8000")),
        help="HTTP port (default: 8000)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    args = parser.parse_args(argv)

    configure_logging(args.verbose)
    logger.info("Starting server v%s (%s transport)", __version__, args.transport)
    if args.transport == "http":
        logger.info("MCP endpoint: http://%s:%d/mcp", args.host, args.port)
        mcp.run(transport="http", host=args.host, port=args.port)
    else:
        mcp.run(transport="stdio")


if __name__ == "__main__":
    main()
