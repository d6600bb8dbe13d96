import math

from app.core.config import TOLERANCES
from scripts import check_closed_forms as ccf


def test_closed_form_check_passes_on_a_coarse_grid():
    assert ccf.run_checks(points=50) == []


def test_closed_form_check_passes_on_the_full_grid():
    assert ccf.run_checks(points=1000) == []


def test_tolerances_come_from_shared_config():
    assert ccf.ORACLE_TOL == TOLERANCES.oracle
    assert ccf.STATE_TOL == TOLERANCES.closed_form_state


def test_closed_form_helpers_at_known_points():
    assert ccf.first_round_e_cd(math.pi / 4) == 1.0
    assert ccf.first_round_e_cd(0.0) == 0.0
    assert ccf.second_round_e_cd(math.pi / 8) == math.log2(1 + 1 / 16)


def test_main_reports_failure(monkeypatch):
    monkeypatch.setattr(ccf, "run_checks", lambda: ["round-1 E_CD deviates"])

    assert ccf.main() == 1


def test_main_reports_success(monkeypatch):
    monkeypatch.setattr(ccf, "run_checks", lambda: [])

    assert ccf.main() == 0
