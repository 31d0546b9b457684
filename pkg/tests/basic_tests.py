#!/usr/bin/env python3
"""
Basic tests for the heunwell package.
Covers imports, presets, report templates and environment settings.
"""

import pytest

import heunwell
from heunwell import ReportHelper, WellParameters
from heunwell.settings import get_default_solver, get_executor_kind, get_worker_count


def test_imports():
    """Test that all main names can be imported."""
    print("Testing imports...")

    from heunwell import (  # noqa: F401
        BranchSpec,
        ConfigError,
        EigenResult,
        FdGrid,
        HeunParameters,
        SpectrumSolver,
        ThresholdMap,
        analytic_energy,
        count_bound_states,
        eval_heun,
        find_eigenvalues,
        threshold_scan,
    )

    for name in heunwell.__all__:
        assert hasattr(heunwell, name), name
    assert heunwell.__version__ == "0.1.0"

    print("✅ All imports successful!\n")


def test_presets():
    print("Testing packaged presets...")

    helper = ReportHelper()
    wells = helper.get_preset_keys("well")
    print(f"Well presets: {wells}")
    assert {"asymmetric_well", "poschl_teller", "manning", "barrier", "qes_ground"} <= set(wells)
    assert set(helper.get_preset_keys("threshold")) == {"threshold_w1_5", "threshold_w1_10", "threshold_w1_15"}

    assert helper.well_parameters("asymmetric_well") == WellParameters(w1=15, w2=12, w3=1)
    with pytest.raises(ValueError):
        helper.get_preset("no_such_well")

    print("✅ Presets test passed!\n")


def test_report_templates():
    print("Testing report templates...")

    helper = ReportHelper()
    assert {"solve", "wronskian_sweep", "wavefunction", "threshold", "qes", "oracle"} <= set(helper.get_report_keys())
    assert helper.get_template_variables("solve") == {"w1", "w2", "w3", "energies", "epsilons"}

    text = helper.render("solve", w1=0.0, w2=-12.0, w3=0.0, energies=[1.0, 4.0], epsilons=None)
    print(text)
    assert "2 bound states" in text
    assert "E[1] = 4.000000" in text

    # every referenced variable must be supplied
    with pytest.raises(ValueError):
        helper.render("solve", w1=0.0)
    with pytest.raises(ValueError):
        helper.render("no_such_report")

    print("✅ Report templates test passed!\n")


def test_user_templates(tmp_path):
    print("Testing user preset files...")

    extra = tmp_path / "extra.yaml"
    extra.write_text(
        "shallow:\n"
        "  description: Dimensional shallow well\n"
        "  V1: 0.0\n  V2: -0.5\n  V3: 0.0\n  L: 2.0\n"
        "short:\n"
        "  template: \"{{ n }} levels\"\n"
    )
    helper = ReportHelper(extra)
    p = helper.well_parameters("shallow")
    assert p.as_tuple() == (0.0, -2.0, 0.0)
    assert p.L == 2.0
    assert helper.render("short", n=3) == "3 levels"

    with pytest.raises(ValueError):
        ReportHelper(tmp_path / "missing.yaml")

    print("✅ User templates test passed!\n")


def test_settings(monkeypatch):
    print("Testing environment settings...")

    monkeypatch.setenv("HEUNWELL_THREADS", "4")
    assert get_worker_count() == 4
    monkeypatch.setenv("HEUNWELL_THREADS", "many")
    assert get_worker_count() == 1
    monkeypatch.setenv("HEUNWELL_THREADS", "0")
    assert get_worker_count() == 1

    monkeypatch.setenv("HEUNWELL_SOLVER", " FD ")
    assert get_default_solver() == "fd"
    monkeypatch.delenv("HEUNWELL_SOLVER")
    assert get_default_solver() == "wronskian"

    monkeypatch.setenv("HEUNWELL_EXECUTOR", "gpu")
    assert get_executor_kind() == "process"
    monkeypatch.setenv("HEUNWELL_EXECUTOR", "thread")
    assert get_executor_kind() == "thread"

    print("✅ Settings test passed!\n")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
