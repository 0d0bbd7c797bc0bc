"""
Triage MCP - Prompting

Builds the diagnostic prompt: the versioned template with the sectioned
logs in its logs slot and the component metadata in its context slot,
kept under a token budget by dropping whole lines.
"""

import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .config import DEFAULT_BUDGET_TOKENS
from .errors import BudgetTooSmall
from .models.logs import LogLevel
from .models.prompt import (
    TRUNCATION_MARKER_FORMAT,
    ComponentContext,
    DiagnosisPrompt,
    LogSection,
    PromptTemplate,
    SectionedLogs,
)

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE_VERSION = "v1"
CHARS_PER_TOKEN = 4


def load_template(path: Optional[Union[str, Path]] = None) -> PromptTemplate:
    """
    Load the bundled template, or an operator-provided one from path.

    Bundled templates are named ``diagnosis_prompt_<version>.txt``; an
    override takes its version from the file stem.
    """
    if path is not None:
        path = Path(path)
        return PromptTemplate(template_text=path.read_text(encoding="utf-8"), version=path.stem)
    text = (
        resources.files("triage_mcp")
        .joinpath("templates", f"diagnosis_prompt_{DEFAULT_TEMPLATE_VERSION}.txt")
        .read_text(encoding="utf-8")
    )
    return PromptTemplate(template_text=text, version=DEFAULT_TEMPLATE_VERSION)


def estimate_tokens(text: str) -> int:
    """Backend-independent token estimate: one token per four characters, rounded up."""
    return _tokens_for_chars(len(text))


def _tokens_for_chars(count: int) -> int:
    return -(-count // CHARS_PER_TOKEN)


def _drop_tier(level: Optional[LogLevel]) -> int:
    if level is None or level <= LogLevel.INFO:
        return 0
    if level == LogLevel.WARNING:
        return 1
    return 2


@dataclass
class _SectionBudget:
    """Running character count of one section while lines are dropped."""

    header_len: int
    kept_chars: int
    kept_count: int
    dropped: int = 0
    dropped_entries: set[int] = field(default_factory=set)

    @property
    def length(self) -> int:
        marker = 0
        if self.dropped:
            marker = len(TRUNCATION_MARKER_FORMAT.format(count=self.dropped)) + 1
        return self.header_len + self.kept_chars + self.kept_count + marker


def _logs_length(budgets: list[_SectionBudget]) -> int:
    if not budgets:
        return 0
    return sum(b.length for b in budgets) + 2 * (len(budgets) - 1)


def truncate_to_budget(
    sectioned: SectionedLogs,
    context: ComponentContext,
    budget_tokens: int,
    template: Optional[PromptTemplate] = None,
) -> SectionedLogs:
    """
    Drop whole lines until the assembled prompt fits budget_tokens.

    Lines go oldest first: INFO (and below), then WARNING, then ERROR and
    FATAL only once nothing else is left. Headers and the notes section are
    never dropped; each section that lost lines starts with a
    ``[... N lines truncated ...]`` marker.

    Raises BudgetTooSmall only when the prompt cannot fit even with every
    line dropped.
    """
    template = template or load_template()
    limit = budget_tokens * CHARS_PER_TOKEN
    base = len(template.fill("", context.render()))

    if base + sectioned.total_chars <= limit:
        return sectioned

    budgets = [
        _SectionBudget(
            header_len=len(section.header),
            kept_chars=sum(len(entry.text) for entry in section.entries),
            kept_count=len(section.entries),
        )
        for section in sectioned.sections
    ]

    candidates = sorted(
        (
            _drop_tier(section.level),
            entry.timestamp,
            section.rank or 0,
            entry.line_index or 0,
            section_idx,
            entry_idx,
        )
        for section_idx, section in enumerate(sectioned.sections)
        if not section.is_notes
        for entry_idx, entry in enumerate(section.entries)
    )

    fitted = False
    warned = False
    for tier, _, _, _, section_idx, entry_idx in candidates:
        if tier == 2 and not warned:
            warned = True
            logger.warning(
                "Budget of %d tokens forces dropping ERROR/FATAL lines; prompt marked truncated",
                budget_tokens,
            )
        budget = budgets[section_idx]
        budget.kept_chars -= len(sectioned.sections[section_idx].entries[entry_idx].text)
        budget.kept_count -= 1
        budget.dropped += 1
        budget.dropped_entries.add(entry_idx)
        if base + _logs_length(budgets) <= limit:
            fitted = True
            break

    if not fitted:
        raise BudgetTooSmall(budget_tokens, _tokens_for_chars(base + _logs_length(budgets)))

    sections: list[LogSection] = []
    for section, budget in zip(sectioned.sections, budgets):
        if not budget.dropped:
            sections.append(section)
            continue
        kept = tuple(e for i, e in enumerate(section.entries) if i not in budget.dropped_entries)
        sections.append(section.model_copy(update={"entries": kept, "dropped": budget.dropped}))

    dropped_total = sum(b.dropped for b in budgets)
    logger.warning("Truncated %d log lines to fit %d tokens", dropped_total, budget_tokens)
    return sectioned.model_copy(update={"sections": tuple(sections)})


def build_prompt(
    template: PromptTemplate,
    sectioned: SectionedLogs,
    context: ComponentContext,
    budget_tokens: int = DEFAULT_BUDGET_TOKENS,
) -> DiagnosisPrompt:
    """Fill the template with the (possibly truncated) logs and the context."""
    fitted = truncate_to_budget(sectioned, context, budget_tokens, template)
    text = template.fill(fitted.render(), context.render())
    prompt = DiagnosisPrompt(
        text=text,
        estimated_tokens=estimate_tokens(text),
        truncated=any(section.dropped for section in fitted.sections),
        sections_included=tuple(
            section.file_name
            for section in fitted.file_sections
            if section.file_name and (section.entries or not section.dropped)
        ),
        budget_tokens=budget_tokens,
        template_version=template.version,
        sectioned=fitted,
    )
    logger.info(
        "Built prompt (template %s): %d estimated tokens, %d sections, truncated=%s",
        template.version, prompt.estimated_tokens, len(prompt.sections_included), prompt.truncated,
    )
    return prompt
