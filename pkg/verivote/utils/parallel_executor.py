"""
Per-booth task execution, sequential or on a thread pool.

Booths share no mutable state, so polling and closing can run them
concurrently; results are always returned keyed and ordered by booth.
"""

import concurrent.futures
import logging
import os
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Generic, List, Optional, TypeVar

from verivote.errors import VerivoteError

logger = logging.getLogger(__name__)

K = TypeVar("K")
R = TypeVar("R")


class ExecutionMode(str, Enum):
    """Execution mode for per-booth work"""
    SEQUENTIAL = "sequential"
    PARALLEL = "parallel"
    ADAPTIVE = "adaptive"  # parallel when there is more than one booth and more than one CPU


class BoothExecutionError(VerivoteError):
    """Raised when one or more booth tasks failed"""

    def __init__(self, message: str, failures: Dict):
        super().__init__(message)
        self.failures = failures


@dataclass
class ExecutionStats:
    total_tasks: int
    failed_tasks: int
    total_execution_time: float
    parallel_efficiency: float


class BoothExecutor(Generic[K, R]):
    def __init__(self, execution_mode: ExecutionMode = ExecutionMode.SEQUENTIAL,
                 max_workers: Optional[int] = None):
        self.execution_mode = ExecutionMode(execution_mode)
        self.max_workers = max_workers or min(4, (os.cpu_count() or 1) + 1)
        self.execution_stats: Optional[ExecutionStats] = None

    def _resolve_mode(self, n: int) -> ExecutionMode:
        if self.execution_mode != ExecutionMode.ADAPTIVE:
            return self.execution_mode
        if n > 1 and (os.cpu_count() or 1) > 1:
            return ExecutionMode.PARALLEL
        return ExecutionMode.SEQUENTIAL

    def run(self, keys: List[K], task: Callable[[K], R], label: str = "task") -> Dict[K, R]:
        """
        Run task(key) for every key.

        Raises:
            BoothExecutionError: If any task raised; carries every failure
        """
        mode = self._resolve_mode(len(keys))
        logger.info(f"Running {len(keys)} {label} tasks in {mode.value} mode")
        start_time = time.time()
        results: Dict[K, R] = {}
        failures: Dict[K, Exception] = {}
        durations: List[float] = []

        def timed(key: K) -> R:
            began = time.time()
            try:
                return task(key)
            finally:
                durations.append(time.time() - began)

        if mode == ExecutionMode.SEQUENTIAL:
            for key in keys:
                try:
                    results[key] = timed(key)
                except Exception as e:
                    logger.error(f"{label} {key} failed: {e}")
                    failures[key] = e
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                future_to_key = {executor.submit(timed, key): key for key in keys}
                for future in concurrent.futures.as_completed(future_to_key):
                    key = future_to_key[future]
                    try:
                        results[key] = future.result()
                    except Exception as e:
                        logger.error(f"{label} {key} failed: {e}")
                        failures[key] = e

        total_time = time.time() - start_time
        sequential_time = sum(durations)
        self.execution_stats = ExecutionStats(
            total_tasks=len(keys),
            failed_tasks=len(failures),
            total_execution_time=total_time,
            parallel_efficiency=sequential_time / total_time if total_time > 0 else 1.0,
        )
        if failures:
            first = next(iter(failures.values()))
            raise BoothExecutionError(f"{len(failures)} {label} tasks failed; first: {first}", failures)
        return {key: results[key] for key in keys}
