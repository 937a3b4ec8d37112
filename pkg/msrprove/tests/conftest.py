from __future__ import annotations

import os

import pytest
from hypothesis import settings

from msrprove.corpus import load_case, permission_voucher_model, replay_pair
from msrprove.frontend import Theory, parse_theory

# HYPOTHESIS_PROFILE=thorough runs the property tests at full strength (10k examples, 100k for rewriting).
settings.register_profile("standard", max_examples=300, deadline=None)
settings.register_profile("thorough", max_examples=10_000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "standard"))


@pytest.fixture(scope="session")
def replay_attack() -> Theory:
    return replay_pair()[0]


@pytest.fixture(scope="session")
def prevent_replay() -> Theory:
    return replay_pair()[1]


@pytest.fixture(scope="session")
def permission_voucher() -> Theory:
    return permission_voucher_model()


@pytest.fixture(scope="session")
def voucher_case():
    return load_case("permission_voucher")


@pytest.fixture()
def theory_of():
    """Parse inline theory text, failing the test on any error."""

    def parse(text: str) -> Theory:
        result = parse_theory(text)
        assert result.theory is not None, "\n".join(str(d) for d in result.diagnostics)
        return result.theory

    return parse
