import os
import time
from datetime import datetime

import psutil


class ResourceMonitor:
    """
    Snapshots process and system resources around a long computation,
    such as a verification run or a sweep.
    """

    def __init__(self):
        self.process = psutil.Process(os.getpid())
        self.started_at = None
        self.start_snapshot = None

    def snapshot(self):
        """Current resource usage as a plain dict."""
        memory = psutil.virtual_memory()
        return {
            'timestamp': datetime.now().isoformat(),
            'cpu_count': psutil.cpu_count() or 1,
            'memory_percent': memory.percent,
            'rss_mb': round(self.process.memory_info().rss / (1024 * 1024), 2),
        }

    def start(self):
        self.started_at = time.perf_counter()
        self.start_snapshot = self.snapshot()
        return self.start_snapshot

    def stop(self):
        """Report covering the interval since start()."""
        end = self.snapshot()
        elapsed = time.perf_counter() - self.started_at if self.started_at is not None else 0.0
        return {
            'start': self.start_snapshot,
            'end': end,
            'elapsed_s': round(elapsed, 3),
            'rss_growth_mb': round(end['rss_mb'] - (self.start_snapshot or end)['rss_mb'], 2),
        }
