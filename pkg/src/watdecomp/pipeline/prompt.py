"""Prompt records for one wat snippet, in training or inference form."""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..context import ContextBundle
from ..errors import PromptTooLong
from ..slicer import Snippet

INSTRUCTION_VERSION = "1"
INSTRUCTION = (
    "Translate the WebAssembly text fragment under [Input] into C source code.\n"
    "1. The C code must behave exactly like the wat fragment and should read like "
    "code a person would write.\n"
    "2. Tokens of the form <<name_N>> stand for nested loops that are translated "
    "separately. Copy every such token unchanged, on its own line, where the loop belongs.\n"
    "3. Name each variable local_OFFSET, where OFFSET is the byte offset of its slot "
    "in the function's stack frame.\n"
    "4. Write string constants as STR_OFFSET, where OFFSET is the address of the string "
    "in linear memory."
)

INSTRUCTION_LABEL = "[Instruction]"
INPUT_LABEL = "[Input]"
RESPONSE_LABEL = "[Response]"
MODES = ("finetune", "inference")
DEFAULT_MAX_TOKENS = 2048

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


def count_tokens(text: str) -> int:
    """Word/punctuation count; a tokenizer-free stand-in for model tokens."""
    return sum(1 for _ in _TOKEN_RE.finditer(text))


@dataclass(frozen=True)
class PromptRecord:
    block_id: str
    instruction: str
    defined_vars: tuple[str, ...]
    callee_decls: tuple[str, ...]
    wat_snippet: str
    mode: str = "inference"
    response: str | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "finetune" and self.response is None:
            raise ValueError("finetune prompts need a response")

    def render_input(self) -> str:
        vars_text = "\n".join(self.defined_vars) or "(none)"
        decl_text = "\n".join(self.callee_decls) or "(none)"
        return (
            f"Defined variables:\n{vars_text}\n"
            f"Function declarations:\n{decl_text}\n"
            f"Wat:\n{self.wat_snippet}"
        )

    def render(self) -> str:
        text = f"{INSTRUCTION_LABEL}\n{self.instruction}\n{INPUT_LABEL}\n{self.render_input()}\n{RESPONSE_LABEL}\n"
        if self.mode == "finetune":
            text += self.response
        return text

    @property
    def prefix(self) -> str:
        """The inference form of the prompt (everything before the response body)."""
        return PromptRecord(
            self.block_id, self.instruction, self.defined_vars, self.callee_decls, self.wat_snippet
        ).render()


def synthesize_prompt(
    snippet: Snippet,
    ctx: ContextBundle,
    mode: str = "inference",
    response: str | None = None,
    instruction: str = INSTRUCTION,
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> PromptRecord:
    record = PromptRecord(
        block_id=snippet.block_id,
        instruction=instruction,
        defined_vars=tuple(v.render() for v in ctx.defined_before),
        callee_decls=tuple(ctx.callee_declarations),
        wat_snippet=snippet.text,
        mode=mode,
        response=response if mode == "finetune" else None,
    )
    used = count_tokens(record.render())
    if used > max_tokens:
        raise PromptTooLong(used, max_tokens, snippet.block_id)
    return record
