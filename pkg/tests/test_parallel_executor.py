"""Tests for the per-booth executor."""

import threading

import pytest

from verivote.utils.parallel_executor import BoothExecutionError, BoothExecutor, ExecutionMode


@pytest.mark.parametrize("mode", list(ExecutionMode))
def test_results_are_keyed_and_ordered(mode):
    executor = BoothExecutor(mode, max_workers=3)
    results = executor.run([3, 1, 2], lambda b: b * 10, label="square")
    assert list(results.items()) == [(3, 30), (1, 10), (2, 20)]
    assert executor.execution_stats.total_tasks == 3
    assert executor.execution_stats.failed_tasks == 0


def test_parallel_mode_uses_threads():
    seen = set()
    lock = threading.Lock()
    barrier = threading.Barrier(2, timeout=5)

    def task(booth):
        barrier.wait()
        with lock:
            seen.add(threading.get_ident())
        return booth

    BoothExecutor(ExecutionMode.PARALLEL, max_workers=2).run([1, 2], task)
    assert len(seen) == 2


@pytest.mark.parametrize("mode", [ExecutionMode.SEQUENTIAL, ExecutionMode.PARALLEL])
def test_failures_are_collected(mode):
    def task(booth):
        if booth % 2:
            raise ValueError(f"booth {booth} broke")
        return booth

    executor = BoothExecutor(mode, max_workers=2)
    with pytest.raises(BoothExecutionError) as info:
        executor.run([1, 2, 3, 4], task, label="polling")
    assert sorted(info.value.failures) == [1, 3]
    assert executor.execution_stats.failed_tasks == 2


def test_unknown_mode():
    with pytest.raises(ValueError):
        BoothExecutor("turbo")
