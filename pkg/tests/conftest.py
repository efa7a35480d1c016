import functools

import pytest

from monadforge.exact_field import GaussianField, PrimeField, RationalField
from monadforge.monad import gen_instanton_syzygy, gen_null_correlation

FIELDS = {"prime": PrimeField(), "rational": RationalField(), "gaussian": GaussianField()}

ACCEPTANCE = {}


@functools.lru_cache(maxsize=None)
def instanton(n, seed=0):
    return gen_instanton_syzygy(n, seed=seed)


@pytest.fixture(params=sorted(FIELDS))
def field(request):
    return FIELDS[request.param]


@pytest.fixture
def nc():
    return gen_null_correlation(PrimeField())


@pytest.fixture
def nc_q():
    return gen_null_correlation(RationalField())


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
