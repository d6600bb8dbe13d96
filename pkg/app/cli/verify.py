from __future__ import annotations

from app.cli.dependencies import get_family_service
from app.core.config import Settings
from app.domain.models import TheoremCertificate
from app.storage.run_storage import RunStorage

VERIFY_COLUMNS = ("n", "e_cd", "predicted_e_cd", "min_pt_eigenvalue", "margin")


def verify(settings: Settings, storage: RunStorage) -> int:
    """Certify that ``n_target`` pairs all end up entangled; exit 1 with the failing round otherwise."""
    family = get_family_service(settings)
    t = settings.t
    if t is None:
        t = family.find_t(settings.n_target)
        if t is None:
            storage.write_table([], VERIFY_COLUMNS)
            print(f"FAIL: no admissible t found for n_target={settings.n_target}")
            return 1

    outcome = family.verify_theorem(settings.n_target, t)
    storage.write_table([check.model_dump() for check in outcome.rounds], VERIFY_COLUMNS)
    for check in outcome.rounds:
        margin = "-" if check.margin is None else f"{check.margin:.6e}"
        print(f"  round {check.n:4d}  E_CD={check.e_cd:.6e}  margin={margin}")

    if isinstance(outcome, TheoremCertificate):
        print(f"OK: t={t:.12g} serves all {outcome.rounds_checked} pairs")
        return 0
    margin = "-" if outcome.margin is None else f"{outcome.margin:.6e}"
    print(f"FAIL: t={t:.12g} fails at round {outcome.failed_round} ({outcome.reason}; margin={margin})")
    return 1
