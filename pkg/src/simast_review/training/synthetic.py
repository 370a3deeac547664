"""Seeded synthetic review corpus.

Every pair shares a random method. Accepted revisions (label 1) insert a null guard on the
reference parameter at the top of the body, ``if (p == null) { return <default>; }``;
rejected revisions (label 0) insert a neutral local variable instead. Base bodies never
contain ``if`` or ``null``, so the guard is the only signal.
"""

from __future__ import annotations

import logging

import numpy as np

from simast_review.training.dataset import ReviewRecord


logger = logging.getLogger(__name__)

METHOD_NAMES = ("compute", "process", "handle", "update", "resolve", "render", "check", "merge")
MODIFIERS = ("public", "private", "protected", "public static", "private static")
REFERENCE_TYPES = ("String", "Object", "Item", "Config", "Request")
REFERENCE_NAMES = ("name", "value", "item", "config", "entry", "request")
NUMBER_NAMES = ("count", "size", "limit", "index", "step")
LOCAL_NAMES = ("total", "offset", "delta", "scaled", "width", "height", "result", "margin")
LOG_WORDS = ("start", "done", "retry", "skip", "ready")
REPOSITORIES = ("alpha", "beta", "gamma")
RETURN_DEFAULTS = {"int": "0", "boolean": "false", "String": '""'}


class _MethodWriter:
    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self.locals = list(rng.permutation(LOCAL_NAMES))
        self.return_type = str(rng.choice(list(RETURN_DEFAULTS)))
        self.reference = str(rng.choice(REFERENCE_NAMES))
        self.number = str(rng.choice(NUMBER_NAMES))
        self.header = (
            f"{rng.choice(MODIFIERS)} {self.return_type} {rng.choice(METHOD_NAMES)}"
            f"({rng.choice(REFERENCE_TYPES)} {self.reference}, int {self.number})"
        )

    def fresh_local(self) -> str:
        return self.locals.pop()

    def constant(self) -> int:
        return int(self.rng.integers(1, 10))

    def statement(self) -> str:
        kind = int(self.rng.integers(0, 5))
        if kind == 0:
            return f"int {self.fresh_local()} = {self.number} * {self.constant()};"
        if kind == 1:
            return f"System.out.println({self.reference});"
        if kind == 2:
            return f'log.debug("{self.rng.choice(LOG_WORDS)}");'
        if kind == 3:
            return (
                f"for (int i = 0; i < {self.number}; i = i + 1) "
                f"{{ System.out.println(i); }}"
            )
        return f"while ({self.number} > {self.constant()}) {{ {self.number} = {self.number} - 1; }}"

    def return_statement(self) -> str:
        if self.return_type == "int":
            return f"return {self.number} + {self.constant()};"
        if self.return_type == "boolean":
            return f"return {self.number} > {self.constant()};"
        return f"return {self.reference};"

    def guard(self) -> str:
        default = RETURN_DEFAULTS[self.return_type]
        return f"if ({self.reference} == null) {{ return {default}; }}"

    def neutral(self) -> str:
        return f"int {self.fresh_local()} = {self.number} + {self.constant()};"

    def render(self, body: list[str]) -> str:
        lines = [f"{self.header} {{", *(f"    {line}" for line in body), "}"]
        return "\n".join(lines)


def generate_synthetic_records(pairs: int = 400, seed: int = 0) -> list[ReviewRecord]:
    """Half the pairs (rounded down) are accepted guard insertions, the rest neutral edits."""
    rng = np.random.default_rng(seed)
    labels = rng.permutation([1] * (pairs // 2) + [0] * (pairs - pairs // 2))
    records: list[ReviewRecord] = []
    for index, label in enumerate(labels):
        writer = _MethodWriter(rng)
        body = [writer.statement() for _ in range(int(rng.integers(2, 4)))]
        closing = writer.return_statement()
        if label == 1:
            revised_body = [writer.guard(), *body]
        else:
            position = int(rng.integers(0, len(body) + 1))
            revised_body = [*body[:position], writer.neutral(), *body[position:]]
        records.append(
            ReviewRecord(
                id=f"syn-{index:04d}",
                original=writer.render([*body, closing]),
                revised=writer.render([*revised_body, closing]),
                label=int(label),
                repository=str(rng.choice(REPOSITORIES)),
            )
        )
    logger.info("Generated %d synthetic review pairs (seed %d)", len(records), seed)
    return records
