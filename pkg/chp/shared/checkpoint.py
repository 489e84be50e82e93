"""Checkpoint management for resumable differential test runs."""

from __future__ import annotations

import hashlib
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Set

from .constants import ORACLE_ARTIFACTS

logger = logging.getLogger(__name__)


def run_key(**settings: Any) -> str:
    """Stable short hash of the settings that determine a run's results."""
    payload = json.dumps(settings, sort_keys=True, default=str)
    return hashlib.md5(payload.encode("utf-8")).hexdigest()[:12]


class Checkpoint:
    """
    Track per-rule progress of an oracle test run for resume capability.

    Usage:
        checkpoint = Checkpoint.load("oracle-test", key=run_key(seed=0, samples=200))

        for rule in rules:
            if rule in checkpoint.completed_items:
                continue  # Already done

            checkpoint.mark_in_progress(rule)
            # ... sample and compare ...
            checkpoint.complete(rule, result)

        checkpoint.finalize()
    """

    def __init__(
        self,
        step_name: str,
        key: str,
        checkpoint_path: Optional[Path] = None,
    ):
        self.step_name = step_name
        self.key = key
        default_path = ORACLE_ARTIFACTS / f"{step_name}_{key}_checkpoint.json"
        self.checkpoint_path = checkpoint_path or default_path

        self.started_at: str = datetime.now().isoformat()
        self.updated_at: str = self.started_at
        self.status: str = "in_progress"

        self.total_items: int = 0
        self.completed_count: int = 0
        self.failed_count: int = 0
        self.skipped_count: int = 0

        self.completed_items: Set[str] = set()
        self.results: Dict[str, Dict[str, Any]] = {}  # item_id -> result summary
        self.failed_items: Dict[str, str] = {}  # item_id -> error message
        self.current_item: Optional[str] = None

    @classmethod
    def load(cls, step_name: str, key: str, directory: Optional[Path] = None) -> "Checkpoint":
        """Load an unfinished checkpoint for this run key or create a new one."""
        checkpoint_path = (directory or ORACLE_ARTIFACTS) / f"{step_name}_{key}_checkpoint.json"

        if checkpoint_path.exists():
            try:
                data = json.loads(checkpoint_path.read_text())
                if data.get("step") == step_name and data.get("key") == key and data.get("status") == "in_progress":
                    instance = cls(step_name, key, checkpoint_path)
                    instance.started_at = data.get("started_at", instance.started_at)
                    instance.updated_at = data.get("updated_at", instance.updated_at)

                    progress = data.get("progress", {})
                    instance.total_items = progress.get("total_items", 0)
                    instance.completed_count = progress.get("completed", 0)
                    instance.failed_count = progress.get("failed", 0)
                    instance.skipped_count = progress.get("skipped", 0)

                    instance.completed_items = set(data.get("completed_items", []))
                    instance.results = data.get("results", {})
                    instance.failed_items = data.get("failed_items", {})
                    instance.current_item = data.get("resume_from")

                    logger.info(f"Resuming {step_name} from checkpoint: {instance.completed_count}/{instance.total_items}")
                    return instance
            except (json.JSONDecodeError, KeyError) as e:
                logger.warning(f"Could not load checkpoint ({e}), starting fresh")

        return cls(step_name, key, checkpoint_path)

    def reset(self) -> None:
        """Forget all progress and delete the checkpoint file."""
        self.completed_items.clear()
        self.results.clear()
        self.failed_items.clear()
        self.completed_count = self.failed_count = self.skipped_count = 0
        if self.checkpoint_path.exists():
            self.checkpoint_path.unlink()

    def set_total(self, total: int) -> None:
        self.total_items = total
        self._save()

    def mark_in_progress(self, item_id: str) -> None:
        self.current_item = item_id

    def complete(self, item_id: str, result: Optional[Dict[str, Any]] = None) -> None:
        """Mark an item as done and remember its result summary."""
        self.completed_items.add(item_id)
        if result is not None:
            self.results[item_id] = result
        self.completed_count += 1
        self.updated_at = datetime.now().isoformat()
        self.current_item = None
        self._save()

    def fail(self, item_id: str, error: str) -> None:
        self.failed_items[item_id] = error
        self.failed_count += 1
        self.updated_at = datetime.now().isoformat()
        self.current_item = None
        self._save()

    def skip(self, item_id: str) -> None:
        """Mark an item as skipped (already done in a previous run)."""
        self.skipped_count += 1

    def finalize(self) -> None:
        self.status = "completed"
        self.updated_at = datetime.now().isoformat()
        self._save()
        logger.info(
            f"Completed {self.step_name}: {self.completed_count} done, "
            f"{self.failed_count} failed, {self.skipped_count} skipped"
        )

    def _save(self) -> None:
        self.checkpoint_path.parent.mkdir(parents=True, exist_ok=True)
        data = {
            "step": self.step_name,
            "key": self.key,
            "started_at": self.started_at,
            "updated_at": self.updated_at,
            "status": self.status,
            "progress": {
                "total_items": self.total_items,
                "completed": self.completed_count,
                "failed": self.failed_count,
                "skipped": self.skipped_count,
            },
            "completed_items": sorted(self.completed_items),
            "results": self.results,
            "failed_items": self.failed_items,
            "resume_from": self.current_item,
        }
        self.checkpoint_path.write_text(json.dumps(data, indent=2))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "step": self.step_name,
            "key": self.key,
            "status": self.status,
            "progress": {
                "total_items": self.total_items,
                "completed": self.completed_count,
                "failed": self.failed_count,
                "skipped": self.skipped_count,
            },
        }
