import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbital_forge.experiments import (
    SINC2_HALF,
    SMOKE,
    SMOKE_TOTAL_TIME,
    RunReport,
    emit_report,
    envelope_fwhm,
    envelope_peaks,
    fit_line,
    load_report,
    run_population_scenario,
    run_resonance_scan,
    run_time_depth_sweep,
    run_ts_sweep,
    sinc2_model,
)
from orbital_forge.tdse import OBSERVABLE_COLUMNS


@pytest.fixture(scope="module")
def smoke_report():
    return run_population_scenario(3.0, SMOKE_TOTAL_TIME, 0.25, 0.0, SMOKE)


def test_population_report_columns(smoke_report):
    assert smoke_report.columns[: len(OBSERVABLE_COLUMNS)] == OBSERVABLE_COLUMNS
    assert len(smoke_report.rows) == SMOKE.n_samples
    assert smoke_report.rows[-1]["t"] == pytest.approx(SMOKE_TOTAL_TIME)
    s = smoke_report.summary
    assert s["rwa_final_fidelity"] == pytest.approx(1, abs=1e-9)
    assert s["final_fidelity"] > 0.96


def test_loss_decomposition(smoke_report):
    s = smoke_report.summary
    assert s["non_40_leakage_at_max"] == pytest.approx(s["max_leakage"] - s["P40_at_max_leakage"])
    # the |40> channel dominates the losses
    assert s["P40_share_at_max"] >= 0.5


def test_max_leakage_near_pulse_maximum(smoke_report):
    s = smoke_report.summary
    T, f = SMOKE_TOTAL_TIME, 0.25
    peaks = envelope_peaks(T, f)
    widths = (envelope_fwhm(f * T), envelope_fwhm((1 - f) * T))
    assert min(abs(s["t_max_leakage"] - p) - w for p, w in zip(peaks, widths)) <= 0


def test_envelope_fwhm():
    d = 10.0
    s = np.linspace(0, 1, 200001)
    bump = s**2 * (1 - s) ** 2
    above = s[bump >= bump.max() / 2]
    assert abs((above[-1] - above[0]) * d - envelope_fwhm(d)) < 1e-3


def test_report_files_deterministic(tmp_path, smoke_report):
    again = run_population_scenario(3.0, SMOKE_TOTAL_TIME, 0.25, 0.0, SMOKE)
    a = emit_report(smoke_report, tmp_path / "a")
    b = emit_report(again, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()


def test_report_round_trip(tmp_path, smoke_report):
    emit_report(smoke_report, tmp_path)
    back = load_report(tmp_path, smoke_report.scenario)
    assert back.summary == smoke_report.summary
    assert back.checks == smoke_report.checks
    assert back.columns == smoke_report.columns
    assert np.array_equal(back.column("fidelity"), smoke_report.column("fidelity"))


def test_empty_report_header_only(tmp_path):
    r = RunReport("empty", {}, ("t", "x"), [], {}, {})
    csv_path, json_path = emit_report(r, tmp_path)
    assert csv_path.read_text() == "t,x\n"
    assert load_report(tmp_path, "empty").rows == []


def test_emit_surfaces_path_errors(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match=str(blocker)):
        emit_report(RunReport("x", {}, ("t",), [], {}, {}), blocker / "sub")


@given(
    st.floats(0.2, 1.0),
    st.floats(20.0, 80.0),
    st.floats(-0.005, 0.005),
    st.floats(0.0, 0.2),
)
def test_sinc2_fit_recovers_parameters(A, B, d0, C):
    d = np.linspace(-0.03, 0.03, 31)
    fit = fit_line(d, sinc2_model(d, A, B, d0, C), "sinc2")
    assert fit.converged and fit.r_squared > 0.999999
    assert abs(fit.center - d0) < 1e-6
    assert abs(fit.fwhm - 2 * SINC2_HALF / B) < 1e-6


def test_sinc2_beats_other_shapes_on_sinc_data():
    d = np.linspace(-0.03, 0.03, 31)
    y = sinc2_model(d, 0.9, 45.0, 0.002, 0.05)
    r = {m: fit_line(d, y, m).r_squared for m in ("sinc2", "gaussian", "lorentzian")}
    assert r["sinc2"] > r["gaussian"] and r["sinc2"] > r["lorentzian"]


def test_unknown_line_model():
    with pytest.raises(ValueError):
        fit_line([0, 1, 2], [0, 1, 0], "voigt")


def test_ts_sweep_smoke():
    r = run_ts_sweep(3.0, SMOKE_TOTAL_TIME, [0.25, 0.5], SMOKE)
    assert [row["ts_fraction"] for row in r.rows] == [0.25, 0.5]
    assert r.summary["argmax_ts_fraction"] in (0.25, 0.5)
    assert r.summary["spread"] == pytest.approx(abs(r.rows[0]["fidelity"] - r.rows[1]["fidelity"]))


def test_ts_sweep_validates_grid():
    with pytest.raises(ValueError):
        run_ts_sweep(3.0, 100.0, [0.0, 0.5], SMOKE)


def test_time_depth_sweep_smoke():
    r = run_time_depth_sweep([3.0], [50.0, SMOKE_TOTAL_TIME], 0.25, SMOKE)
    assert [(row["v"], row["T"]) for row in r.rows] == [(3.0, 50.0), (3.0, SMOKE_TOTAL_TIME)]
    # very short operation times break the scheme
    assert r.checks["shortest_T_degraded"]


def test_time_depth_sweep_validates():
    with pytest.raises(ValueError):
        run_time_depth_sweep([], [100.0])


def test_resonance_scan_smoke():
    grid = np.linspace(-0.04, 0.04, 9)
    r = run_resonance_scan(3.0, SMOKE_TOTAL_TIME, 0.25, grid, SMOKE)
    assert r.summary["rwa_peak_detuning"] == 0.0
    assert r.summary["fit_converged"]
    assert len(r.rows) == 9
    assert math.isfinite(r.summary["fwhm"])


def test_resonance_scan_needs_points():
    with pytest.raises(ValueError):
        run_resonance_scan(3.0, 100.0, 0.25, [0.0, 0.01], SMOKE)
