"""
Triage MCP - Pydantic Models

Domain types for logs, prompts, diagnoses, findings, evaluation and the
MCP tool inputs.
"""

from .backend import DEFAULT_MODEL_NAME, LlmParams, RawResponse
from .diagnosis import (
    CitationResolution,
    CitedLogLine,
    Diagnosis,
    LineLocation,
    Outcome,
    ResolvedDiagnosis,
)
from .evaluation import (
    FAULT_LABELS,
    AssertionFailure,
    CaseResult,
    CaseSpec,
    ComponentCrash,
    EvalReport,
    FaultKind,
    GroundTruth,
    MissingComponentLog,
    MissingDriverLog,
    StartupTimeout,
    Verdict,
)
from .finding import (
    DEFAULT_LINK_SCHEME,
    FeedbackEvent,
    FeedbackKind,
    Finding,
    FindingLink,
    MetricsReport,
)
from .logs import IngestionNote, LogBundle, LogFile, LogLevel, LogLine, NoteKind
from .prompt import (
    ComponentContext,
    ContextEntry,
    DiagnosisPrompt,
    LogSection,
    PromptTemplate,
    SectionedLogs,
    SectionEntry,
)
from .service import LatencyStats, PipelineRun, UsageStats
from .tool_inputs import (
    BuildPromptInput,
    DiagnoseBundleInput,
    GetFindingInput,
    RecordFeedbackInput,
    RunEvaluationInput,
)

__all__ = [
    # Logs
    "LogLevel",
    "NoteKind",
    "IngestionNote",
    "LogLine",
    "LogFile",
    "LogBundle",
    # Prompt
    "SectionEntry",
    "LogSection",
    "SectionedLogs",
    "ContextEntry",
    "ComponentContext",
    "PromptTemplate",
    "DiagnosisPrompt",
    # Backend
    "DEFAULT_MODEL_NAME",
    "LlmParams",
    "RawResponse",
    # Diagnosis
    "Outcome",
    "CitedLogLine",
    "Diagnosis",
    "LineLocation",
    "CitationResolution",
    "ResolvedDiagnosis",
    # Findings
    "DEFAULT_LINK_SCHEME",
    "FeedbackKind",
    "FindingLink",
    "Finding",
    "FeedbackEvent",
    "MetricsReport",
    # Evaluation
    "FAULT_LABELS",
    "ComponentCrash",
    "StartupTimeout",
    "AssertionFailure",
    "MissingDriverLog",
    "MissingComponentLog",
    "FaultKind",
    "CaseSpec",
    "GroundTruth",
    "Verdict",
    "CaseResult",
    "EvalReport",
    # Service
    "LatencyStats",
    "UsageStats",
    "PipelineRun",
    # Tool inputs
    "DiagnoseBundleInput",
    "BuildPromptInput",
    "GetFindingInput",
    "RecordFeedbackInput",
    "RunEvaluationInput",
]
