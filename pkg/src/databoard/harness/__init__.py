"""Headless evaluation harness: benchmark tasks, replay, and reporting."""

from .tasks import BenchmarkTask, classify_difficulty, load_task
from .timeline import merge_timeline

__all__ = ["BenchmarkTask", "classify_difficulty", "load_task", "merge_timeline"]
