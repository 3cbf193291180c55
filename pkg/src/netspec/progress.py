"""
Progress indicators for long-running netspec commands.

Progress bars render on stderr and disappear when a task finishes, so they
never mix with report output on stdout.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Generator, Optional

from rich.console import Console
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
)


class NetspecProgress:
    """
    Progress indicator system for netspec operations.

    ``task`` yields an update callback; ``flow_task`` and ``sweep_task`` adapt
    it to the callbacks taken by ``integrate`` and ``perturbation_sweep``.
    """

    def __init__(self, console: Optional[Console] = None, enabled: bool = True) -> None:
        self.console = console or Console(stderr=True)
        self.enabled = enabled
        self._progress = Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(bar_width=40, style="blue"),
            TaskProgressColumn(),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
            disable=not enabled,
        )

    @contextmanager
    def task(
        self, description: str, total: Optional[float] = None
    ) -> Generator[Callable[..., None], None, None]:
        """
        Context manager for a progress task.

        Args:
            description: Task description
            total: Total amount of work (None for indeterminate)

        Yields:
            ``update(advance=1, description=None, completed=None)``
        """
        with self._progress:
            task_id = self._progress.add_task(description, total=total)

            def update(
                advance: float = 1,
                description: Optional[str] = None,
                completed: Optional[float] = None,
            ) -> None:
                kwargs = {}
                if description:
                    kwargs["description"] = description
                if completed is not None:
                    kwargs["completed"] = completed
                else:
                    kwargs["advance"] = advance
                self._progress.update(task_id, **kwargs)

            try:
                yield update
            finally:
                self._progress.update(task_id, completed=total or 100)

    @contextmanager
    def flow_task(
        self, t_max: float, description: str = "Stage 2 consensus flow"
    ) -> Generator[Callable[[float, float], None], None, None]:
        """Yields an ``on_sample(t, V)`` callback tracking time against ``t_max``."""
        with self.task(description, total=t_max) as update:

            def on_sample(t: float, v: float) -> None:
                update(completed=min(t, t_max), description=f"{description} (V={v:.2e})")

            yield on_sample

    @contextmanager
    def sweep_task(
        self, total: int, description: str = "Perturbation sweep"
    ) -> Generator[Callable[[float, int], None], None, None]:
        """Yields an ``on_trial(a, trial)`` callback counting finished trials."""
        with self.task(description, total=total) as update:

            def on_trial(a: float, trial: int) -> None:
                update(1, description=f"{description} (a={a:g})")

            yield on_trial

