from pathlib import Path

import numpy as np
import pytest

from blogcap import _kernels_py

try:
    from blogcap import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

DATA = Path(__file__).parent / "data"

KERNEL_BACKENDS = [pytest.param(_kernels_py, id="python")]
KERNEL_BACKENDS.append(
    pytest.param(
        _kernels_c,
        id="cython",
        marks=pytest.mark.skipif(_kernels_c is None, reason="compiled kernels not built"),
    )
)


@pytest.fixture(params=KERNEL_BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def write_edges(path, rows, header="source_id,target_id"):
    path.write_text(header + "\n" + "".join(f"{a},{b}\n" for a, b in rows), encoding="utf-8")
    return path
