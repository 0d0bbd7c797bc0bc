"""
Triage MCP - Tool Implementations

Tool implementations organized by category.
Supports lazy loading via the TOOL_CATEGORIES environment variable.
"""

import logging
import os
from typing import Callable

logger = logging.getLogger(__name__)

CATEGORIES = ("diagnosis", "findings", "evaluation")


def get_available_categories() -> list[str]:
    """Get list of available tool categories."""
    return list(CATEGORIES)


def is_lazy_loading_enabled() -> bool:
    """Check if lazy loading is active."""
    return bool(os.environ.get("TOOL_CATEGORIES"))


def get_requested_categories() -> list[str]:
    """Get list of categories requested via TOOL_CATEGORIES env var."""
    categories_env = os.environ.get("TOOL_CATEGORIES", "")
    if not categories_env:
        return get_available_categories()

    requested = [c.strip().lower() for c in categories_env.split(",") if c.strip()]
    valid = [c for c in requested if c in CATEGORIES]

    if not valid:
        logger.warning("No valid categories in TOOL_CATEGORIES. Loading all.")
        return get_available_categories()

    invalid = sorted(set(requested) - set(valid))
    if invalid:
        logger.warning("Unknown categories ignored: %s", ", ".join(invalid))

    return valid


def load_tools_for_category(category: str) -> list[Callable]:
    """Load tools for a specific category."""
    if category == "diagnosis":
        from .diagnosis import DIAGNOSIS_TOOLS
        return DIAGNOSIS_TOOLS
    elif category == "findings":
        from .findings import FINDING_TOOLS
        return FINDING_TOOLS
    elif category == "evaluation":
        from .evaluation import EVALUATION_TOOLS
        return EVALUATION_TOOLS
    return []


def get_all_tools() -> list[Callable]:
    """Get all tools based on TOOL_CATEGORIES configuration."""
    categories = get_requested_categories()
    tools = []

    for category in categories:
        tools.extend(load_tools_for_category(category))

    if is_lazy_loading_enabled():
        logger.info(
            "Lazy loading enabled: %d tools from categories: %s", len(tools), ", ".join(categories)
        )

    return tools


__all__ = [
    "get_available_categories",
    "is_lazy_loading_enabled",
    "get_requested_categories",
    "get_all_tools",
]
