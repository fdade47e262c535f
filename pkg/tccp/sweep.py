"""Parallel evaluation of independent grid points.

Points are farmed out to a thread pool and collected as they complete; the
returned list is always in grid order, so results do not depend on scheduling.
"""

import concurrent.futures
import logging
from typing import Callable, List, Optional, Sequence, TypeVar

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

logger = logging.getLogger(__name__)

console = Console(stderr=True)

T = TypeVar("T")
R = TypeVar("R")


class GridRunner:
    """Maps a pure per-point function over a grid."""

    def __init__(self, workers: int = 1, show_progress: bool = False):
        """Initialize the runner.

        Args:
            workers: Thread pool size; 1 evaluates sequentially
            show_progress: Draw a progress bar on stderr
        """
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.workers = workers
        self.show_progress = show_progress

    @classmethod
    def from_config(cls, config) -> "GridRunner":
        return cls(workers=config.sweep.parallel_workers,
                   show_progress=config.sweep.show_progress)

    def map(self, fn: Callable[[T], R], points: Sequence[T],
            description: str = "Evaluating grid") -> List[R]:
        """Evaluate fn at every point.

        Returns:
            Results in the order of points

        Raises:
            Whatever fn raised first, after the pool has drained
        """
        points = list(points)
        if not points:
            return []
        if self.workers == 1 or len(points) == 1:
            return self._run_sequential(fn, points, description)

        results: List[Optional[R]] = [None] * len(points)
        errors = []
        with self._progress() as progress:
            task = progress.add_task(description, total=len(points)) if progress else None
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
                future_to_index = {executor.submit(fn, point): i for i, point in enumerate(points)}
                for future in concurrent.futures.as_completed(future_to_index):
                    index = future_to_index[future]
                    try:
                        results[index] = future.result()
                    except Exception as e:
                        errors.append((index, e))
                    if progress:
                        progress.advance(task)
        if errors:
            index, error = min(errors, key=lambda item: item[0])
            logger.debug("grid point %d failed: %s", index, error)
            raise error
        return results

    def _run_sequential(self, fn, points, description):
        results = []
        with self._progress() as progress:
            task = progress.add_task(description, total=len(points)) if progress else None
            for point in points:
                results.append(fn(point))
                if progress:
                    progress.advance(task)
        return results

    def _progress(self):
        if not self.show_progress:
            return _NoProgress()
        return Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TextColumn("{task.completed}/{task.total}"),
            TimeElapsedColumn(),
            console=console,
        )


class _NoProgress:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False
