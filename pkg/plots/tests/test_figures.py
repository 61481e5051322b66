import numpy as np
import pytest

from baroflow_plots import FigureInputError, FigureSpec, render, snapshot_grid
from baroflow_plots.cli import main
from baroflow_plots.figures import SNAPSHOT_HEADER, read_table

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def test_all_four_kinds_render_from_solver_outputs(short_run, decoupled_run, tmp_path):
    figures = {
        "density_heatmap": (short_run / "snapshot_t0.csv",),
        "extrema_history": (short_run / "diagnostics.csv",),
        "section_overlay": (short_run / "section_t0.csv",
                            short_run / "section_t0.05.csv"),
        "energy_history": (short_run / "diagnostics.csv",
                           decoupled_run / "diagnostics.csv"),
    }
    for kind, inputs in figures.items():
        out = render(FigureSpec(kind=kind, inputs=inputs,
                                output=tmp_path / f"{kind}.png"))
        payload = out.read_bytes()
        assert payload.startswith(PNG_MAGIC)
        assert len(payload) > 1000


@pytest.mark.parametrize("fixture_name,expected_side", [
    ("short_run", 51), ("projection_run_m100", 101)])
def test_heatmap_grid_inference(fixture_name, expected_side, request, tmp_path):
    rundir = request.getfixturevalue(fixture_name)
    data = read_table(rundir / "snapshot_t0.csv", SNAPSHOT_HEADER)
    x, y, rho = snapshot_grid(data)
    assert len(x) == len(y) == expected_side
    assert rho.shape == (expected_side, expected_side)
    # peak of the initial bump sits at the grid center
    j, i = np.unravel_index(np.argmax(rho), rho.shape)
    assert x[i] == pytest.approx(0.0, abs=1e-12)
    assert y[j] == pytest.approx(0.0, abs=1e-12)
    out = render(FigureSpec(kind="density_heatmap",
                            inputs=(rundir / "snapshot_t0.csv",),
                            output=tmp_path / f"heat_{expected_side}.png"))
    assert out.exists()


def test_non_square_snapshot_is_a_hard_error(short_run, tmp_path):
    src = (short_run / "snapshot_t0.csv").read_text().splitlines()
    clipped = tmp_path / "clipped.csv"
    clipped.write_text("\n".join(src[:-3]) + "\n")
    with pytest.raises(FigureInputError, match="square"):
        render(FigureSpec(kind="density_heatmap", inputs=(clipped,),
                          output=tmp_path / "x.png"))


def test_wrong_header_rejected(short_run, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(FigureInputError, match="header"):
        render(FigureSpec(kind="extrema_history", inputs=(bad,),
                          output=tmp_path / "x.png"))


def test_missing_input_rejected(tmp_path):
    with pytest.raises(FigureInputError, match="missing"):
        FigureSpec(kind="extrema_history", inputs=(tmp_path / "nope.csv",),
                   output=tmp_path / "x.png")


def test_too_many_overlay_series(short_run, tmp_path):
    section = short_run / "section_t0.csv"
    with pytest.raises(FigureInputError, match="at most 3"):
        render(FigureSpec(kind="section_overlay", inputs=(section,) * 4,
                          output=tmp_path / "x.png"))


def test_single_point_history_renders(tmp_path, projection_run_m100):
    out = render(FigureSpec(kind="extrema_history",
                            inputs=(projection_run_m100 / "diagnostics.csv",),
                            output=tmp_path / "single.png"))
    assert out.read_bytes().startswith(PNG_MAGIC)


def test_rerendering_is_idempotent(short_run, tmp_path):
    spec = FigureSpec(kind="extrema_history",
                      inputs=(short_run / "diagnostics.csv",),
                      output=tmp_path / "idem.png")
    first = render(spec).read_bytes()
    second = render(spec).read_bytes()
    assert first == second


def test_rendering_does_not_mutate_inputs(short_run, tmp_path):
    path = short_run / "diagnostics.csv"
    before = path.read_bytes()
    render(FigureSpec(kind="energy_history", inputs=(path,),
                      output=tmp_path / "e.png"))
    assert path.read_bytes() == before


class TestCli:
    def test_render_via_cli(self, short_run, tmp_path, capsys):
        code = main(["--kind", "section_overlay",
                     "--input", str(short_run / "section_t0.csv"),
                     "--input", str(short_run / "section_t0.05.csv"),
                     "--label", "t=0", "--label", "t=0.05",
                     "--out", str(tmp_path / "overlay.png")])
        assert code == 0
        assert (tmp_path / "overlay.png").exists()

    def test_cli_error_path(self, tmp_path, capsys):
        code = main(["--kind", "density_heatmap",
                     "--input", str(tmp_path / "absent.csv"),
                     "--out", str(tmp_path / "x.png")])
        assert code == 2
        assert "missing" in capsys.readouterr().err
