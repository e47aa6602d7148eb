import pytest

from wavewalk import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # compile the jitted kernels once so no test pays (or times) the JIT cost
    kernels.warmup()
