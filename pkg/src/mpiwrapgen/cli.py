"""Batch driver: load spec documents, merge, generate the wrapper tree.

Exit codes: 0 success (no errors; no warnings under --strict), 1 validation
errors, 2 I/O errors.  Diagnostics go to stderr, the summary to stdout.  The
output tree is staged in a temporary directory and moved into place only on
success, so a failing run never leaves a partial tree behind.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
import uuid
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .apispec import ApiSpec, count_by_family, load_api_spec, merge_api_specs
from .codegen import (
    DEFAULT_INTERCEPT_SCHEME,
    WRAPPER_FAMILIES,
    GeneratedTree,
    GenerateOptions,
    generate_tree,
    load_template_documents,
)
from .errors import Diagnostics, WrapgenError
from .symbols import SCHEME_TABLE, SCHEMES_BY_ID, ManglingScheme
from .tasks import load_config_with_library

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


@dataclass
class RunOptions:
    spec_paths: list[Path]
    supplement_path: Optional[Path] = None
    template_dir: Optional[Path] = None
    task_config_path: Optional[Path] = None
    out_dir: Path = Path("wrapgen-out")
    families: tuple[str, ...] = WRAPPER_FAMILIES
    schemes: tuple[ManglingScheme, ...] = SCHEME_TABLE
    strict: bool = False
    report_json: bool = False
    parallel: bool = False


def _default_data_path(name: str) -> Path:
    return Path(str(resources.files("mpiwrapgen").joinpath("data", name)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpiwrapgen",
        description="Generate PMPI interception wrappers and configure checks "
                    "from machine-readable MPI procedure definitions.",
    )
    parser.add_argument("--spec", action="append", required=True, metavar="PATH",
                        help="spec document; repeat for multiple standard versions, oldest first")
    parser.add_argument("--supplement", metavar="PATH",
                        help="removed-interface supplement document")
    parser.add_argument("--templates", metavar="DIR",
                        help="directory of chapter template documents (default: built-in set)")
    parser.add_argument("--tasks", metavar="PATH",
                        help="task configuration document (default: built-in configuration)")
    parser.add_argument("--out", required=True, metavar="DIR", help="output tree directory")
    parser.add_argument("--family", action="append", choices=WRAPPER_FAMILIES,
                        help="wrapper family to emit; repeatable (default: all)")
    parser.add_argument("--scheme", action="append", choices=sorted(SCHEMES_BY_ID),
                        metavar="SCHEME",
                        help="mangling scheme for symbol candidates; repeatable "
                             "(default: the full six-scheme table)")
    parser.add_argument("--strict", action="store_true", help="treat warnings as errors")
    parser.add_argument("--report", choices=["json"], help="machine-readable run report on stdout")
    parser.add_argument("--parallel", action="store_true",
                        help="render source files in parallel (output is identical)")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return parser


def options_from_args(args: argparse.Namespace) -> RunOptions:
    schemes = tuple(SCHEMES_BY_ID[s] for s in args.scheme) if args.scheme else SCHEME_TABLE
    families = tuple(dict.fromkeys(args.family)) if args.family else WRAPPER_FAMILIES
    return RunOptions(
        spec_paths=[Path(p) for p in args.spec],
        supplement_path=Path(args.supplement) if args.supplement else None,
        template_dir=Path(args.templates) if args.templates else None,
        task_config_path=Path(args.tasks) if args.tasks else None,
        out_dir=Path(args.out),
        families=families,
        schemes=schemes,
        strict=args.strict,
        report_json=args.report == "json",
        parallel=args.parallel,
    )


def _load_merged_spec(options: RunOptions, diagnostics: Diagnostics) -> ApiSpec:
    specs = [load_api_spec(path, diagnostics) for path in options.spec_paths]
    supplement = None
    if options.supplement_path is not None:
        supplement = load_api_spec(options.supplement_path, diagnostics)
    return merge_api_specs(specs, supplement)


def _write_tree(tree: GeneratedTree, out_dir: Path) -> None:
    """Stage the tree next to out_dir, then swap it into place."""
    out_dir = out_dir.absolute()
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    stage = out_dir.parent / f".{out_dir.name}.stage-{uuid.uuid4().hex[:8]}"
    try:
        for rel_path, content in tree.files.items():
            target = stage / rel_path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(content, encoding="utf-8", newline="\n")
    except OSError:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    if out_dir.exists():
        graveyard = out_dir.parent / f".{out_dir.name}.old-{uuid.uuid4().hex[:8]}"
        out_dir.rename(graveyard)
        stage.rename(out_dir)
        shutil.rmtree(graveyard)
    else:
        stage.rename(out_dir)


def run(options: RunOptions) -> int:
    """Execute the full pipeline; returns the process exit status."""
    diagnostics = Diagnostics()
    try:
        spec = _load_merged_spec(options, diagnostics)

        template_dir = options.template_dir or _default_data_path("templates")
        templates = load_template_documents(template_dir)

        config_path = options.task_config_path or _default_data_path("task_config.json")
        task_config = load_config_with_library(config_path, spec, diagnostics)

        # An explicit scheme selection also picks the legacy intercept's
        # emission scheme (first one named).
        intercept_scheme = (options.schemes[0] if options.schemes != SCHEME_TABLE
                            else DEFAULT_INTERCEPT_SCHEME)
        tree = generate_tree(
            spec,
            templates,
            task_config,
            GenerateOptions(
                families=options.families,
                schemes=options.schemes,
                intercept_scheme=intercept_scheme,
                parallel=options.parallel,
            ),
            diagnostics,
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except WrapgenError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    for warning in diagnostics.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if options.strict and diagnostics.warnings:
        print("error: warnings are fatal under --strict", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        _write_tree(tree, options.out_dir)
    except OSError as exc:
        print(f"error: cannot write output tree: {exc}", file=sys.stderr)
        return EXIT_IO

    counts = count_by_family(spec)
    families = tree.manifest["families"]
    if options.report_json:
        report = {
            "generator_version": __version__,
            "out_dir": str(options.out_dir),
            "procedures": counts,
            "families": {name: info["wrappers"] for name, info in families.items()},
            "checks": tree.manifest["checks"]["total"],
            "warnings": diagnostics.warnings,
        }
        print(json.dumps(report, indent=2))
    else:
        summary = "  ".join(f"{name}: {info['wrappers']}" for name, info in families.items())
        print(f"{summary}  checks: {tree.manifest['checks']['total']}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(options_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
