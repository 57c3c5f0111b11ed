import math

import numpy as np
import pytest

from swapsim import devices as dv
from swapsim import netlist as nl
from swapsim.devices import ComponentKind as CK, ComponentSpec as CS

SWAP_SRC = """\
chip swap {
  ports T, B;
  pcnot c1 (T, B) extinction=18dB;
  mcnot r1 (T) extinction=20dB loss=1dB;
  pcnot c2 (T, B) extinction=18dB;
}
"""

IDEAL_SRC = """\
chip swap {
  ports T, B;
  pcnot c1 (T, B);
  mcnot r1 (T);
  pcnot c2 (T, B);
}
"""


# a corpus of valid sources exercising every component kind and unit form
def _corpus():
    sources = [SWAP_SRC, IDEAL_SRC]
    kinds_single = [
        "hwp w1 (T) angle=22.5deg;",
        "qwp w2 (B) angle=0.785rad;",
        "phase_v pv (T) phase=90deg;",
        "polarizer p1 (T) angle=45deg;",
        "fiber f1 (B) loss=0.2dB phase=0.1rad;",
        "loss l1 (T) loss=3dB;",
        "mcnot m1 (B) extinction=25dB loss=0.5dB loss_other=0.1dB;",
    ]
    kinds_double = [
        "bs5050 b1 (T, B);",
        "mzi z1 (T, B) phase=1.5707963267948966 extinction=20dB;",
        "facet fa (T, B) loss_h=3dB loss_v=3.45dB xtalk=0.05;",
        "pcnot pc (T, B) extinction=18dB imbalance=0.45dB;",
        "pcnot pr (B, T) extinction=22dB;",
    ]
    for stmt in kinds_single + kinds_double:
        sources.append("chip c {\n  ports T, B;\n  %s\n}\n" % stmt)
    # combined chips with several statements and comments
    sources.append(
        "# full cascade with analysis optics\n"
        "chip full {\n  ports T, B;\n"
        "  facet fin (T, B) loss_h=3dB loss_v=3dB;\n"
        "  pcnot c1 (T, B) extinction=18dB imbalance=0.45dB;\n"
        "  mcnot r1 (T) extinction=20dB loss=1dB;\n"
        "  pcnot c2 (T, B) extinction=18dB imbalance=0.45dB;\n"
        "  facet fout (T, B) loss_h=3dB loss_v=3dB;\n"
        "}\n")
    sources.append("chip two { ports A, Bp; pcnot x (A, Bp); }\n"
                   "chip three { ports T, B; mcnot y (B); }\n")
    sources.append("chip spaces { ports T, B; pcnot c (T, B) extinction=18 dB; }\n")
    sources.append("chip bare { ports T, B; pcnot c (T, B) extinction=18; }\n")
    sources.append("chip sci { ports T, B; loss l (T) loss=1e-1dB; }\n")
    sources.append("chip neg { ports T, B; phase_v p (T) phase=-0.5rad; }\n")
    sources.append("chip depol { ports T, B; pcnot c (T, B) extinction=18dB depol=0.01; }\n")
    sources.append("chip rot { ports T, B; mcnot m (T) rotation_error=1deg; }\n")
    return sources


class TestParse:
    def test_example_cascade(self):
        ast = nl.parse(SWAP_SRC)
        assert len(ast.chips) == 1
        chip = ast.chips[0]
        assert chip.name == "swap"
        assert chip.ports == ("T", "B")
        assert len(chip.statements) == 3
        assert [s.kind for s in chip.statements] == ["pcnot", "mcnot", "pcnot"]
        assert chip.statements[1].params[1].name == "loss"
        assert chip.statements[1].params[1].unit == "dB"

    def test_empty_input(self):
        with pytest.raises(nl.ParseError) as exc:
            nl.parse("")
        assert "expected 'chip'" in exc.value.message
        assert exc.value.span.line == 1
        assert exc.value.span.column == 1

    def test_undeclared_port(self):
        src = "chip c { ports T, B; pcnot c1 (T, X); }"
        with pytest.raises(nl.ParseError) as exc:
            nl.parse(src)
        assert exc.value.code == "undeclared-port"
        assert src[exc.value.span.start:exc.value.span.end] == "X"

    def test_unknown_kind(self):
        with pytest.raises(nl.ParseError) as exc:
            nl.parse("chip c { ports T, B; gizmo g (T); }")
        assert exc.value.code == "unknown-kind"

    def test_unknown_unit(self):
        with pytest.raises(nl.ParseError) as exc:
            nl.parse("chip c { ports T, B; pcnot c1 (T, B) extinction=18qB; }")
        assert exc.value.code == "unknown-unit"

    def test_duplicate_instance(self):
        with pytest.raises(nl.ParseError) as exc:
            nl.parse("chip c { ports T, B; pcnot a (T, B); mcnot a (T); }")
        assert exc.value.code == "duplicate-instance"

    def test_deg_converts_at_parse(self):
        ast = nl.parse("chip c { ports T, B; hwp w (T) angle=45deg; }")
        p = ast.chips[0].statements[0].params[0]
        assert p.unit == "rad"
        assert p.value == pytest.approx(math.pi / 4)

    def test_fuzz_never_escapes_parse_error(self):
        rng = np.random.default_rng(7)
        alphabet = list("chip ports pcnot mcnot {}();,=0123456789.dBradegnm_ \n#abcxyzTB")
        for _ in range(600):
            n = int(rng.integers(0, 100))
            src = "".join(rng.choice(alphabet) for _ in range(n))
            try:
                nl.parse(src)
            except nl.ParseError as err:
                assert 0 <= err.span.start <= err.span.end <= len(src)
                assert err.span.line >= 1 and err.span.column >= 1

    def test_every_error_span_is_inside_input(self):
        bad = [
            "",
            "chip",
            "chip c {",
            "chip c { ports T; }",
            "chip c { ports T, B; pcnot (T, B); }",
            "chip c { ports T, B; gizmo g (T); }",
            "chip c { ports T, B; pcnot c1 (T, X); }",
            "chip c { ports T, B; pcnot c1 (T, B) extinction=18zz; }",
            "chip c { ports T, B; pcnot c1 (T, B) extinction=; }",
            "chip c { ports T, B; pcnot c1 (T, B) }",
        ]
        for src in bad:
            with pytest.raises(nl.ParseError) as exc:
                nl.parse(src)
            span = exc.value.span
            assert 0 <= span.start <= span.end <= len(src)
            assert span.line >= 1 and span.column >= 1


class TestFormat:
    def test_golden_canonical_form(self):
        ast = nl.parse(SWAP_SRC)
        assert nl.format_netlist(ast) == (
            "chip swap {\n"
            "  ports T, B;\n"
            "  pcnot c1 (T, B) extinction=18dB;\n"
            "  mcnot r1 (T) extinction=20dB loss=1dB;\n"
            "  pcnot c2 (T, B) extinction=18dB;\n"
            "}\n")

    def test_idempotent(self):
        for src in _corpus():
            once = nl.format_netlist(nl.parse(src))
            twice = nl.format_netlist(nl.parse(once))
            assert once == twice

    def test_comments_discarded(self):
        src = "# top comment\nchip c { ports T, B; # inline\n pcnot a (T, B); }"
        out = nl.format_netlist(nl.parse(src))
        assert "#" not in out

    def test_roundtrip_structural_equality_corpus(self):
        corpus = _corpus()
        assert len(corpus) >= 20
        for src in corpus:
            ast = nl.parse(src)
            again = nl.parse(nl.format_netlist(ast))
            assert again.structure() == ast.structure()


class TestCompile:
    def test_ideal_cascade_matches_builder_oracle(self):
        chip = nl.compile_netlist(nl.parse(IDEAL_SRC))
        built = dv.build_swap_chip(CS(CK.PCNOT, {}), CS(CK.MCNOT, {}), CS(CK.PCNOT, {}))
        d = np.linalg.norm(chip.channel().kraus[0] - built.channel().kraus[0])
        assert d <= 1e-10
        d2 = np.linalg.norm(chip.channel().kraus[0] - dv.ideal_swap_unitary())
        assert d2 <= 1e-10

    def test_measured_cascade_bit_identical_to_builder(self):
        chip = nl.compile_netlist(nl.parse(SWAP_SRC))
        pc = CS(CK.PCNOT, {"extinction_db": 18.0})
        mc = CS(CK.MCNOT, {"extinction_db": 20.0, "loss_db_t": 1.0})
        built = dv.build_swap_chip(pc, mc, pc)
        a = chip.channel().kraus[0]
        b = built.channel().kraus[0]
        assert np.array_equal(a, b)

    def test_three_ports_rejected(self):
        ast = nl.parse("chip c { ports T, B, C; pcnot a (T, B); }")
        with pytest.raises(nl.CompileError) as exc:
            nl.compile_netlist(ast)
        assert exc.value.code == "port-count"

    def test_parameter_out_of_range(self):
        ast = nl.parse("chip c { ports T, B; pcnot a (T, B) extinction=-3dB; }")
        with pytest.raises(nl.CompileError) as exc:
            nl.compile_netlist(ast)
        assert exc.value.code == "param-range"

    def test_unknown_parameter(self):
        ast = nl.parse("chip c { ports T, B; pcnot a (T, B) wibble=3; }")
        with pytest.raises(nl.CompileError) as exc:
            nl.compile_netlist(ast)
        assert exc.value.code == "unknown-param"

    def test_unit_mismatch(self):
        ast = nl.parse("chip c { ports T, B; pcnot a (T, B) extinction=18rad; }")
        with pytest.raises(nl.CompileError) as exc:
            nl.compile_netlist(ast)
        assert exc.value.code == "bad-unit"

    def test_deterministic_bit_identical(self):
        a = nl.compile_netlist(nl.parse(SWAP_SRC)).channel().kraus[0]
        b = nl.compile_netlist(nl.parse(SWAP_SRC)).channel().kraus[0]
        assert np.array_equal(a, b)

    def test_whole_corpus_compiles(self):
        for src in _corpus():
            ast = nl.parse(src)
            for chip in ast.chips:
                model = nl.compile_chip(chip)
                k = model.channel()
                assert k.dim_in == 4 and k.dim_out == 4

    def test_reversed_ports_swap_roles(self):
        fwd = nl.compile_netlist(nl.parse(
            "chip c { ports T, B; mcnot m (T); }")).channel().kraus[0]
        rev = nl.compile_netlist(nl.parse(
            "chip c { ports T, B; mcnot m (B); }")).channel().kraus[0]
        swap = np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
        np.testing.assert_allclose(rev, swap @ fwd @ swap, atol=1e-15)

    def test_mzi_statement_is_spatial_transfer(self):
        chip = nl.compile_netlist(nl.parse(
            "chip c { ports T, B; mzi z (T, B) phase=180deg; }"))
        k = chip.channel().kraus[0]
        expect = np.kron(dv.mzi_transfer(math.pi), np.eye(2))
        np.testing.assert_allclose(k, expect, atol=1e-12)
