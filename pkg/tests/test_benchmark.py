import importlib.util
from pathlib import Path

import pytest

from hierlab import _kernels

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"


@pytest.mark.skipif("cython" not in _kernels.AVAILABLE, reason="extension not built")
def test_benchmark_runs_and_backends_agree(capsys):
    spec = importlib.util.spec_from_file_location("bench_kernels", BENCH)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    before = _kernels.backend
    mod.main(["--quick", "--repeat", "1"])
    out = capsys.readouterr().out
    assert "disagree" not in out
    assert out.count("x\n") == 4
    assert _kernels.backend is before
