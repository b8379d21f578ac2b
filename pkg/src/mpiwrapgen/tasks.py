"""Reusable, parametrized wrapper-functionality units and their composition.

A task bundles one piece of extra wrapper behavior (e.g. computing the number
of bytes a send transfers) as text fragments contributed at named hook points
of the wrapper skeleton.  Which tasks each wrapper gets is configured in a
JSON document; bindings map task parameters to the target procedure's argument
names, so one task serves every procedure of a shape.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .apispec import ApiSpec, ProcedureSpec
from .errors import Diagnostics, LocalVariableCollisionError, RenderError, TaskError

HOOK_POINTS = ("use_statements", "local_vars", "enter", "pre_pmpi", "post_pmpi", "exit")

# Skeleton-provided substitution variables available to every contribution.
WELL_KNOWN_VARIABLES = ("procedure", "family")

TASK_FAMILIES = ("c", "fortran_intercept", "f08")


class _BracedTemplate(string.Template):
    """``${name}`` placeholders only; ``$${`` escapes to a literal ``${``."""

    pattern = r"""
        \$(?:
            (?P<escaped>\$)(?=\{) |
            \{(?P<braced>[_a-z][_a-z0-9]*)\} |
            (?P<named>\b\B) |
            (?P<invalid>)
        )
    """
    flags = re.IGNORECASE


def substitute(template: str, mapping: Mapping[str, str]) -> str:
    """Strict placeholder substitution; unknown or malformed placeholders fail."""
    try:
        return _BracedTemplate(template).substitute(mapping)
    except KeyError as exc:
        raise RenderError(f"unresolved placeholder ${{{exc.args[0]}}}") from None
    except ValueError as exc:
        raise RenderError(f"malformed placeholder syntax: {exc}") from None


def extract_placeholders(template: str) -> set[str]:
    names = set()
    for match in _BracedTemplate.pattern.finditer(template):  # type: ignore[union-attr]
        if match.group("braced"):
            names.add(match.group("braced"))
        elif match.group("invalid") is not None:
            raise RenderError(f"malformed placeholder syntax near {template[match.start():match.start()+12]!r}")
    return names


@dataclass(frozen=True)
class TaskParameter:
    name: str
    default: Optional[str] = None
    arg_ref: bool = False  # bound value must name an argument of the target procedure

    @property
    def required(self) -> bool:
        return self.default is None


@dataclass(frozen=True)
class TaskDefinition:
    name: str
    parameters: tuple[TaskParameter, ...]
    # family -> hook point -> template text
    contributions: dict[str, dict[str, str]]
    locals: tuple[str, ...] = ()

    def parameter(self, name: str) -> Optional[TaskParameter]:
        for p in self.parameters:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class TaskInstance:
    definition: TaskDefinition
    bindings: dict[str, str]
    target: str

    def substitution_map(self, family: str) -> dict[str, str]:
        return {**self.bindings, "procedure": self.target, "family": family}

    def local_names(self, family: str) -> list[str]:
        return [substitute(name, self.substitution_map(family)) for name in self.definition.locals]


@dataclass
class TaskConfig:
    # procedure name -> ordered task instances
    assignments: dict[str, list[TaskInstance]] = field(default_factory=dict)

    def for_procedure(self, name: str) -> list[TaskInstance]:
        return self.assignments.get(name, [])


def _parse_task_definition(raw: dict) -> TaskDefinition:
    try:
        name = raw["name"]
    except KeyError:
        raise TaskError("task definition without a name") from None
    parameters = tuple(
        TaskParameter(p["name"], p.get("default"), bool(p.get("arg_ref", False)))
        for p in raw.get("parameters", ())
    )
    raw_contrib = raw.get("contributions", {})
    # Plain {hook: text} is shorthand for the f08 family.
    if raw_contrib and not set(raw_contrib) & set(TASK_FAMILIES):
        raw_contrib = {"f08": raw_contrib}
    contributions: dict[str, dict[str, str]] = {}
    declared = {p.name for p in parameters} | set(WELL_KNOWN_VARIABLES)
    for family, hooks in raw_contrib.items():
        if family not in TASK_FAMILIES:
            raise TaskError(f"task {name}: unknown contribution family {family!r}")
        contributions[family] = {}
        for hook, text in hooks.items():
            if hook not in HOOK_POINTS:
                raise TaskError(f"task {name}: unknown hook point {hook!r}")
            undeclared = extract_placeholders(text) - declared
            if undeclared:
                raise TaskError(
                    f"task {name}: hook {hook} references undeclared placeholder(s) "
                    + ", ".join(sorted(undeclared))
                )
            contributions[family][hook] = text
    for local in raw.get("locals", ()):
        undeclared = extract_placeholders(local) - declared
        if undeclared:
            raise TaskError(f"task {name}: local {local!r} references undeclared placeholders")
    return TaskDefinition(
        name=name,
        parameters=parameters,
        contributions=contributions,
        locals=tuple(raw.get("locals", ())),
    )


def load_task_library(documents: Sequence[dict]) -> dict[str, TaskDefinition]:
    """Parse task-definition documents into a name-keyed library."""
    library: dict[str, TaskDefinition] = {}
    for document in documents:
        for raw in document.get("tasks", ()):
            definition = _parse_task_definition(raw)
            if definition.name in library:
                raise TaskError(f"task {definition.name} defined twice in the library")
            library[definition.name] = definition
    return library


def instantiate(
    definition: TaskDefinition,
    bindings: Mapping[str, str],
    proc: ProcedureSpec,
) -> TaskInstance:
    """Bind a task to one procedure; all non-defaulted parameters must be bound
    and argument references must name parameters of the procedure."""
    resolved: dict[str, str] = {}
    for param in definition.parameters:
        if param.name in bindings:
            resolved[param.name] = str(bindings[param.name])
        elif param.default is not None:
            resolved[param.name] = param.default
        else:
            raise TaskError(
                f"task {definition.name} for {proc.name}: parameter {param.name!r} is not bound"
            )
    unknown = set(bindings) - {p.name for p in definition.parameters}
    if unknown:
        raise TaskError(
            f"task {definition.name} for {proc.name}: unknown parameter(s) "
            + ", ".join(sorted(unknown))
        )
    argument_names = {p.name for p in proc.parameters}
    for param in definition.parameters:
        if param.arg_ref and resolved[param.name] not in argument_names:
            raise TaskError(
                f"task {definition.name} for {proc.name}: binding {param.name}="
                f"{resolved[param.name]!r} names no argument of {proc.name}"
            )
    return TaskInstance(definition=definition, bindings=resolved, target=proc.name)


def _instances_from_entries(
    entries: Sequence[dict],
    proc: ProcedureSpec,
    library: Mapping[str, TaskDefinition],
) -> list[TaskInstance]:
    instances = []
    for entry in entries:
        task_name = entry.get("task")
        if task_name not in library:
            raise TaskError(f"unknown task {task_name!r} assigned to {proc.name}")
        instances.append(instantiate(library[task_name], entry.get("with", {}), proc))
    return instances


def load_task_config(
    document: dict,
    library: Mapping[str, TaskDefinition],
    spec: ApiSpec,
    diagnostics: Optional[Diagnostics] = None,
) -> TaskConfig:
    """Resolve a task-configuration document against the library and the spec.

    Group entries expand one task list over a set of procedures; procedures
    absent from the spec are skipped with a warning (groups and explicit
    entries alike), so one shipped configuration serves fixture subsets.
    """
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    assignments: dict[str, list[TaskInstance]] = {}

    def assign(proc_name: str, entries: Sequence[dict]) -> None:
        if proc_name not in spec.procedures:
            diagnostics.warn(f"task config names {proc_name}, which is not in the spec; skipped")
            return
        proc = spec.procedures[proc_name]
        assignments.setdefault(proc_name, []).extend(
            _instances_from_entries(entries, proc, library)
        )

    for group in document.get("groups", ()):
        for proc_name in group.get("procedures", ()):
            assign(proc_name, group.get("tasks", ()))
    for proc_name, entry in document.get("procedures", {}).items():
        assign(proc_name, entry.get("tasks", ()))
    return TaskConfig(assignments=assignments)


def compose(
    instances: Sequence[TaskInstance],
    family: str = "f08",
) -> dict[str, list[str]]:
    """Render all instances' contributions for one family, per hook point in
    instance order.  Local variable names declared by different instances must
    not collide."""
    targets = {i.target for i in instances}
    if len(targets) > 1:
        raise TaskError(f"cannot compose tasks targeting different procedures: {sorted(targets)}")

    seen_locals: dict[str, str] = {}
    for instance in instances:
        for local in instance.local_names(family):
            if local in seen_locals:
                raise LocalVariableCollisionError(
                    f"local variable {local!r} declared by both "
                    f"{seen_locals[local]} and {instance.definition.name}"
                )
            seen_locals[local] = instance.definition.name

    fragments: dict[str, list[str]] = {hook: [] for hook in HOOK_POINTS}
    for instance in instances:
        contrib = instance.definition.contributions.get(family, {})
        mapping = instance.substitution_map(family)
        for hook in HOOK_POINTS:
            if hook in contrib:
                fragments[hook].append(substitute(contrib[hook], mapping))
    return {hook: texts for hook, texts in fragments.items() if texts}


def load_config_with_library(
    config_path: str | Path,
    spec: ApiSpec,
    diagnostics: Optional[Diagnostics] = None,
) -> TaskConfig:
    """Load a config document plus the task-definition documents it references
    via its ``task_library`` field (paths relative to the config file)."""
    config_path = Path(config_path)
    try:
        document = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TaskError(f"{config_path}: not valid JSON: {exc}") from exc
    library_docs = []
    for rel in document.get("task_library", ()):
        lib_path = config_path.parent / rel
        try:
            library_docs.append(json.loads(lib_path.read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise TaskError(f"{lib_path}: not valid JSON: {exc}") from exc
    library = load_task_library(library_docs)
    return load_task_config(document, library, spec, diagnostics)
