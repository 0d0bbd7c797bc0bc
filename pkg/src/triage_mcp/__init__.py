"""
Triage MCP - integration test failure triage

Merges the logs a failed multi-component integration test leaves behind,
asks a language model for the root cause and posts the answer as a finding
with links to the relevant log lines.
"""

__version__ = "1.0.0"


# Lazy imports to avoid circular import issues
def __getattr__(name):
    if name == "mcp":
        from .server import mcp
        return mcp
    elif name == "main":
        from .cli import main
        return main
    elif name == "run_pipeline":
        from .pipeline import run_pipeline
        return run_pipeline
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = ["mcp", "main", "run_pipeline", "__version__"]
