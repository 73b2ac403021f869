"""Shared fixtures for the test suite."""

import pytest

from hughes1d import InitialDatum, atomize

from helpers import REFERENCE_N, REFERENCE_PIECES


@pytest.fixture(scope="session")
def reference_datum():
    return InitialDatum.from_pieces(REFERENCE_PIECES)


@pytest.fixture(scope="session")
def reference_init(reference_datum):
    return atomize(reference_datum, REFERENCE_N)
