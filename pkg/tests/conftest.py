from __future__ import annotations

from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"


@pytest.fixture(scope="session")
def nasa_log_path() -> Path:
    return DATA / "nasa_sample.log"


@pytest.fixture(scope="session")
def slashdot_csv_path() -> Path:
    return DATA / "slashdot_hits.csv"


@pytest.fixture(scope="session")
def scenario_path() -> Path:
    return DATA / "scenario.json"


@pytest.fixture(scope="session")
def nasa_records(nasa_log_path):
    from flashscale.traces import load_trace

    with open(nasa_log_path, "rb") as handle:
        records, skipped = load_trace(handle)
    return records, skipped


@pytest.fixture(scope="session")
def bundled_run(scenario_path, tmp_path_factory):
    """One full four-strategy comparison on the bundled scenario.

    Shared across the acceptance criteria that inspect the same run
    (conservation, directional VM counts, response-time ordering).
    """
    from flashscale.scenario import load_scenario, run_compare

    out = tmp_path_factory.mktemp("bundled_compare")
    scenario = load_scenario(scenario_path)
    results = run_compare(scenario, out)
    return scenario, results, out
