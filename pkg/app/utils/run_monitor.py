import logging
import os
from typing import Optional

import psutil

logger = logging.getLogger(__name__)

MEMORY_WARNING_MB = 4096


class RunMonitor:
    """Counters for a pipeline run, logged together with the process footprint"""

    def __init__(self):
        self.metrics = {
            'songs_processed': 0,
            'frames_processed': 0,
            'epochs_completed': 0,
            'errors': 0,
            'memory_usage_mb': 0.0,
        }
        self.last_train_loss: Optional[float] = None
        self.last_val_accuracy: Optional[float] = None

    def record_song(self, n_frames: int) -> None:
        self.metrics['songs_processed'] += 1
        self.metrics['frames_processed'] += n_frames

    def record_epoch(self, train_loss: float, val_accuracy: float) -> None:
        self.metrics['epochs_completed'] += 1
        self.last_train_loss = train_loss
        self.last_val_accuracy = val_accuracy

    def record_error(self) -> None:
        self.metrics['errors'] += 1

    def _memory_mb(self) -> float:
        process = psutil.Process(os.getpid())
        return round(process.memory_info().rss / 1024 / 1024, 2)

    def log_metrics(self) -> None:
        """Log current counters with memory usage"""
        try:
            self.metrics['memory_usage_mb'] = self._memory_mb()
            logger.info(f"Run Metrics: Songs={self.metrics['songs_processed']}, "
                        f"Frames={self.metrics['frames_processed']}, "
                        f"Epochs={self.metrics['epochs_completed']}, "
                        f"Memory={self.metrics['memory_usage_mb']}MB, Errors={self.metrics['errors']}")
        except psutil.Error as e:
            logger.error(f"Error logging metrics: {e}")

    def get_health_status(self) -> dict:
        try:
            process = psutil.Process(os.getpid())
            memory_mb = process.memory_info().rss / 1024 / 1024
            return {
                "status": "healthy" if memory_mb < MEMORY_WARNING_MB else "warning",
                "memory_usage_mb": round(memory_mb, 2),
                "cpu_percent": process.cpu_percent(),
                "metrics": dict(self.metrics),
            }
        except psutil.Error as e:
            logger.error(f"Error getting health status: {e}")
            return {"status": "error", "message": str(e)}


run_monitor = RunMonitor()
