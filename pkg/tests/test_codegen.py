from __future__ import annotations

import re
from pathlib import Path

import pytest

from mpiwrapgen.apispec import ParameterSpec, query_procedure
from mpiwrapgen.codegen import (
    GenerateOptions,
    SourceFileTemplate,
    ToolFunctionSignature,
    generate_tree,
    guard_name,
    load_template_documents,
    render_source_file,
    render_tool_shim,
    render_wrapper,
    wrapper_variants_for,
)
from mpiwrapgen.errors import RenderError
from mpiwrapgen.interop import status_strategy
from mpiwrapgen.tasks import TaskConfig, compose

TEMPLATE_DIR = Path(__file__).parents[1] / "src" / "mpiwrapgen" / "data" / "templates"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def templates():
    return load_template_documents(TEMPLATE_DIR)


def _unit(spec, config, name, family, variant_index=0):
    proc = query_procedure(spec, name)
    fragments = compose(config.for_procedure(name), family=family)
    variants = wrapper_variants_for(proc, family)
    return render_wrapper(proc, family, fragments, variants[variant_index])


class TestGuardNames:
    def test_f08_descriptor_guard(self, spec10):
        send = query_procedure(spec10, "MPI_Send")
        base, ts = wrapper_variants_for(send, "f08")
        assert guard_name("MPI_Send", "f08", ts) == "HAVE_F08_TS_BUFFERS_MPI_SEND"
        assert guard_name("MPI_Send", "f08", base) == "HAVE_F08_MPI_SEND"

    def test_c_guard(self, spec10):
        send = query_procedure(spec10, "MPI_Send")
        (variant,) = wrapper_variants_for(send, "c")
        assert guard_name("MPI_Send", "c", variant) == "HAVE_C_MPI_SEND"

    def test_guards_unique_over_fixture(self, spec50):
        guards = set()
        for proc in spec50.procedures.values():
            for family in ("c", "fortran_intercept", "f08"):
                if family == "c" and not (proc.has_c_binding and not proc.fortran_only):
                    continue
                if family == "fortran_intercept" and not (proc.has_fortran_binding and not proc.fortran_only):
                    continue
                if family == "f08" and not proc.has_f08_binding:
                    continue
                for variant in wrapper_variants_for(proc, family):
                    guard = guard_name(proc.name, family, variant)
                    assert guard not in guards
                    assert re.fullmatch(r"[A-Z0-9_]+", guard)
                    guards.add(guard)


class TestRenderWrapper:
    def test_f08_send_matches_golden(self, spec10, default_config10):
        unit = _unit(spec10, default_config10, "MPI_Send", "f08")
        golden = (GOLDEN / "mpi_send_f08.F90").read_text(encoding="utf-8")
        assert unit.text + "\n" == golden

    def test_f08_send_structure(self, spec10, default_config10):
        unit = _unit(spec10, default_config10, "MPI_Send", "f08")
        assert unit.guard == "HAVE_F08_MPI_SEND"
        assert "call PMPI_Send_f08(" in unit.text
        assert "integer :: bytes_sent" in unit.text
        assert unit.text.index('write_event("ENTER MPI_Send")') \
            < unit.text.index("call PMPI_Send_f08(") \
            < unit.text.index('write_event("EXIT MPI_Send")')

    def test_f08_optional_ierror_forwarded_only_when_present(self, spec10, default_config10):
        unit = _unit(spec10, default_config10, "MPI_Send", "f08")
        assert "integer, optional, intent(out) :: ierror" in unit.text
        assert "if (present(ierror)) ierror = ierror_local" in unit.text

    def test_c_barrier_minimal(self, spec10):
        unit = _unit(spec10, TaskConfig(), "MPI_Barrier", "c")
        assert unit.text.splitlines()[0] == "#ifdef HAVE_C_MPI_BARRIER"
        assert "PMPI_Barrier(comm)" in unit.text
        assert unit.text.index('write_event("ENTER MPI_Barrier")') \
            < unit.text.index("PMPI_Barrier(comm)") \
            < unit.text.index('write_event("EXIT MPI_Barrier")')

    def test_intercept_send_marshals_and_delegates_to_c_wrapper(self, spec10):
        unit = _unit(spec10, TaskConfig(), "MPI_Send", "fortran_intercept")
        assert unit.text.splitlines()[1].startswith("void mpi_send_(")
        assert "MPI_Fint* count" in unit.text
        assert "MPI_Type_f2c(*datatype)" in unit.text
        assert "MPI_Comm_f2c(*comm)" in unit.text
        assert "MPI_Send(" in unit.text
        assert "pmpi" not in unit.text.lower()

    def test_intercept_ts_variant_not_emitted(self, spec10):
        send = query_procedure(spec10, "MPI_Send")
        variants = wrapper_variants_for(send, "fortran_intercept")
        assert len(variants) == 1
        assert variants[0].descriptor_suffix is None

    def test_f08_buffer_procedures_get_descriptor_unit(self, spec10, default_config10):
        unit = _unit(spec10, default_config10, "MPI_Send", "f08", variant_index=1)
        assert unit.guard == "HAVE_F08_TS_BUFFERS_MPI_SEND"
        assert "subroutine MPI_Send_f08ts(" in unit.text
        assert "call PMPI_Send_f08ts(" in unit.text

    def test_intercept_index_offset(self, spec10):
        unit = _unit(spec10, TaskConfig(), "MPI_Waitany", "fortran_intercept")
        assert "*index = (MPI_Fint) (index_c + 1);" in unit.text

    def test_intercept_logicals_pass_unconverted(self, spec50):
        # Known legacy deficit: no 0/1 normalization construct appears.
        unit = _unit(spec50, TaskConfig(), "MPI_Test", "fortran_intercept")
        assert "flag_c" in unit.text
        assert "!= 0" not in unit.text
        assert "? 1 : 0" not in unit.text

    def test_family_mismatch_rejected(self, merged):
        proc = query_procedure(merged, "MPI_F_sync_reg")
        variant = wrapper_variants_for(proc, "f08")[0]
        with pytest.raises(RenderError):
            render_wrapper(proc, "c", {}, variant)

    def test_unknown_hook_rejected(self, spec10):
        send = query_procedure(spec10, "MPI_Send")
        variant = wrapper_variants_for(send, "c")[0]
        with pytest.raises(RenderError, match="hook"):
            render_wrapper(send, "c", {"sideways": ["x"]}, variant)


class TestToolShim:
    def test_status_signature_gets_pair_and_query_helper(self):
        signature = ToolFunctionSignature("record_recv", (
            ParameterSpec("status", "STATUS", "in"),
        ))
        shim = render_tool_shim(signature, status_strategy(False, "f08"))
        assert shim.fortran_text is not None and shim.c_text is not None
        assert "WRAPGEN_LANG_F08" in shim.fortran_text
        assert "status_h->lang == WRAPGEN_LANG_C" in shim.c_text
        assert "status_h->lang == WRAPGEN_LANG_F08" in shim.c_text
        assert "MPI_Get_count(" in shim.c_text

    def test_integer_only_signature_is_direct(self):
        signature = ToolFunctionSignature("record_rank", (
            ParameterSpec("rank", "RANK", "in"),
            ParameterSpec("size", "OTHER_INT", "in"),
        ))
        shim = render_tool_shim(signature, status_strategy(False, "f08"))
        assert shim.direct
        assert shim.fortran_text is None and shim.c_text is None

    def test_string_plus_logical_needs_both_layers(self):
        signature = ToolFunctionSignature("record_flagged_name", (
            ParameterSpec("name", "STRING", "in"),
            ParameterSpec("flag", "LOGICAL_FLAG", "in"),
        ))
        shim = render_tool_shim(signature, status_strategy(False, "f08"))
        assert shim.fortran_text is not None
        assert shim.c_text is not None
        assert "merge(1_c_int, 0_c_int, flag)" in shim.fortran_text
        assert "wrapgen_fstr_to_cstr(name, name_len)" in shim.c_text


class TestRenderSourceFile:
    def test_listed_wrappers_in_order(self, spec10, default_config10):
        template = SourceFileTemplate("c/p2p.c", "c", "", ("MPI_Send", "MPI_Recv"))
        content = render_source_file(template, spec10, default_config10)
        assert content.index("int MPI_Send(") < content.index("int MPI_Recv(")
        assert content.count("#ifdef HAVE_C_") == 2

    def test_empty_wrapper_list_is_prelude_only(self, spec10, default_config10):
        template = SourceFileTemplate("c/empty.c", "c", "", ())
        content = render_source_file(template, spec10, default_config10)
        assert "#include <mpi.h>" in content
        assert "#ifdef" not in content

    def test_fortran_only_in_c_template_is_error(self, merged, default_config10):
        template = SourceFileTemplate("c/misc.c", "c", "", ("MPI_F_sync_reg",))
        with pytest.raises(RenderError, match="MPI_F_sync_reg"):
            render_source_file(template, merged, TaskConfig())

    def test_missing_procedure_is_error(self, spec10):
        template = SourceFileTemplate("c/p2p.c", "c", "", ("MPI_Missing",))
        with pytest.raises(RenderError, match="MPI_Missing"):
            render_source_file(template, spec10, TaskConfig())

    def test_common_prelude_included(self, spec10):
        template = SourceFileTemplate("c/p2p.c", "c", "/* chapter prelude */", ("MPI_Send",))
        content = render_source_file(template, spec10, TaskConfig())
        assert "/* chapter prelude */" in content


class TestGenerateTree:
    def test_fixture_tree_file_set(self, merged, default_config10, templates):
        tree = generate_tree(merged, templates, default_config10)
        # Chapters with procedures: coll, comm, misc, p2p (no rma/io content).
        expected = {
            "c/coll.c", "c/comm.c", "c/misc.c", "c/p2p.c", "c/wrapgen_runtime.h",
            "f/coll.c", "f/comm.c", "f/misc.c", "f/p2p.c", "f/wrapgen_runtime.h",
            "f08/coll.F90", "f08/comm.F90", "f08/misc.F90", "f08/p2p.F90",
            "f08/wrapgen_events.F90",
            "checks/manifest.json", "manifest.json",
        }
        assert set(tree.files) == expected

    def test_family_filter(self, merged, default_config10, templates):
        tree = generate_tree(merged, templates, default_config10,
                             GenerateOptions(families=("f08",)))
        assert all(p.startswith(("f08/", "checks/")) or p == "manifest.json"
                   for p in tree.files)
        assert "f08/p2p.F90" in tree.files

    def test_wrapper_counts_reconcile(self, merged, default_config10, templates):
        tree = generate_tree(merged, templates, default_config10)
        counts = {f: info["wrappers"] for f, info in tree.manifest["families"].items()}
        assert counts == {"c": 13, "fortran_intercept": 12, "f08": 11}

    def test_skipped_procedures_have_reasons(self, merged, default_config10, templates):
        tree = generate_tree(merged, templates, default_config10)
        skipped = {(s["procedure"], s["family"]) for s in tree.manifest["skipped"]}
        assert ("MPI_F_sync_reg", "c") in skipped
        assert ("MPI_F_sync_reg", "fortran_intercept") in skipped
        assert ("MPI_Comm_f2c", "f08") in skipped
        assert ("MPI_Address", "f08") in skipped

    def test_coverage_reconciliation(self, merged, default_config10, templates):
        tree = generate_tree(merged, templates, default_config10)
        skipped_procs = {s["procedure"] for s in tree.manifest["skipped"]}
        wrapped = set()
        for family, info in tree.manifest["families"].items():
            prefix = {"c": "c/", "fortran_intercept": "f/", "f08": "f08/"}[family]
            for path in info["files"]:
                if path.endswith((".c", ".F90")) and "wrapgen" not in path:
                    wrapped.update(re.findall(r"#ifdef HAVE_\w*?_(MPI_\w+?)(?:_C)?\n",
                                              tree.files[path]))
        for name in merged.procedures:
            assert name.upper() in {w for w in wrapped} or name in skipped_procs

    def test_determinism_sequential_vs_parallel(self, merged, default_config10, templates):
        sequential = generate_tree(merged, templates, default_config10,
                                   GenerateOptions(parallel=False))
        parallel = generate_tree(merged, templates, default_config10,
                                 GenerateOptions(parallel=True))
        again = generate_tree(merged, templates, default_config10,
                              GenerateOptions(parallel=False))
        assert sequential.files == parallel.files == again.files

    def test_no_unresolved_placeholders_in_tree(self, merged, default_config10, templates):
        tree = generate_tree(merged, templates, default_config10)
        for path, content in tree.files.items():
            assert "${" not in content, path

    def test_explicit_template_order_preserved(self, spec10, default_config10):
        doc = {"name": "picked", "select": {"procedures": ["MPI_Recv", "MPI_Send"]}}
        tree = generate_tree(spec10, [doc], default_config10,
                             GenerateOptions(families=("c",)))
        content = tree.files["c/picked.c"]
        assert content.index("int MPI_Recv(") < content.index("int MPI_Send(")

    def test_unknown_template_procedure_is_error(self, spec10, default_config10):
        doc = {"name": "broken", "select": {"procedures": ["MPI_Missing"]}}
        with pytest.raises(RenderError, match="MPI_Missing"):
            generate_tree(spec10, [doc], default_config10)


@pytest.fixture(scope="module")
def tree(merged, default_config10, templates):
    return generate_tree(merged, templates, default_config10)


class TestTreeLaws:

    def test_same_language_pmpi_law_f08(self, tree, merged):
        from mpiwrapgen.interop import needs_same_language_pmpi
        flagged = {p.name for p in merged.procedures.values() if needs_same_language_pmpi(p)}
        for path, content in tree.files.items():
            if not path.startswith("f08/") or path.endswith("wrapgen_events.F90"):
                continue
            for call in re.findall(r"call (PMPI_\w+)\(", content):
                assert re.fullmatch(r"PMPI_MPI_\w+", call) is None
                assert call.endswith(("_f08", "_f08ts")), call

    def test_legacy_layer_never_calls_fortran_pmpi(self, tree):
        for path, content in tree.files.items():
            if path.startswith("f/") and path.endswith(".c"):
                assert "pmpi" not in content.lower(), path

    def test_event_bracketing_in_event_families(self, tree):
        for path, content in tree.files.items():
            if not (path.startswith(("c/", "f08/")) and path.endswith((".c", ".F90"))):
                continue
            if "wrapgen" in Path(path).name:
                continue
            delegation = "call PMPI_" if path.startswith("f08/") else "= PMPI_"
            for unit in content.split("#ifdef ")[1:]:
                enter = unit.find("ENTER MPI_")
                pmpi = unit.find(delegation)
                exit_ = unit.find("EXIT MPI_")
                assert 0 < enter < pmpi < exit_, path


def test_large_count_guard_suffix(spec10):
    from mpiwrapgen.symbols import c_symbol_variant
    send = query_procedure(spec10, "MPI_Send")
    variant = c_symbol_variant(send, large_count=True)
    assert guard_name("MPI_Send", "c", variant) == "HAVE_C_MPI_SEND_C"


def test_intercept_logical_out_converts_back(spec50):
    test = query_procedure(spec50, "MPI_Test")
    unit = render_wrapper(test, "fortran_intercept", {},
                          wrapper_variants_for(test, "fortran_intercept")[0])
    assert "int flag_c;" in unit.text
    assert "*flag = (MPI_Fint) flag_c;" in unit.text
    # Scalar inout handle: converted in, converted back out.
    assert "MPI_Request request_c = MPI_Request_f2c(*request);" in unit.text
    assert "*request = MPI_Request_c2f(request_c);" in unit.text


def test_intercept_string_in_with_hidden_length(spec50):
    file_open = query_procedure(spec50, "MPI_File_open")
    unit = render_wrapper(file_open, "fortran_intercept", {},
                          wrapper_variants_for(file_open, "fortran_intercept")[0])
    assert "int filename_len" in unit.text.splitlines()[1]
    assert "wrapgen_fstr_to_cstr(filename, filename_len)" in unit.text
    assert "free(filename_c);" in unit.text


def test_f08_lines_within_fortran_limit(merged, default_config10, templates):
    tree = generate_tree(merged, templates, default_config10,
                         GenerateOptions(families=("f08",)))
    for path, content in tree.files.items():
        if path.endswith(".F90"):
            for line in content.splitlines():
                assert len(line) <= 132, (path, line)


def test_f08_long_call_uses_continuations(spec10, default_config10):
    sendrecv = query_procedure(spec10, "MPI_Sendrecv")
    fragments = compose(default_config10.for_procedure("MPI_Sendrecv"), family="f08")
    unit = render_wrapper(sendrecv, "f08", fragments,
                          wrapper_variants_for(sendrecv, "f08")[0])
    call_lines = [l for l in unit.text.splitlines() if "call PMPI_Sendrecv" in l]
    assert call_lines and call_lines[0].endswith("&")


def test_intercept_family_task_fragments(spec10):
    from mpiwrapgen.tasks import instantiate, load_task_library
    doc = {"tasks": [{
        "name": "count_calls",
        "parameters": [],
        "locals": [],
        "contributions": {
            "fortran_intercept": {
                "local_vars": "static int call_count;",
                "enter": "++call_count;",
            }
        },
    }]}
    library = load_task_library([doc])
    send = query_procedure(spec10, "MPI_Send")
    instances = [instantiate(library["count_calls"], {}, send)]
    fragments = compose(instances, family="fortran_intercept")
    unit = render_wrapper(send, "fortran_intercept", fragments,
                          wrapper_variants_for(send, "fortran_intercept")[0])
    assert "static int call_count;" in unit.text
    assert unit.text.index("static int call_count;") < unit.text.index("++call_count;")
    assert unit.text.index("++call_count;") < unit.text.index("MPI_Send(")
