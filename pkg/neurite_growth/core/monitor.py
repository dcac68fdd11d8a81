# neurite_growth/core/monitor.py
# Run monitoring: progress heartbeat, stall detection and resource metrics
# of a simulation while it steps
# Does NOT control the run, only observes and reports

import logging
import os
import threading
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import psutil

logger = logging.getLogger(__name__)


@dataclass
class RunMetrics:
    wall_seconds: float
    steps: int
    steps_per_second: float
    peak_memory_mb: float
    cpu_percent: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class RunMonitor:
    def __init__(self, name: str, total_steps: int = 0, check_interval: float = 5.0,
                 stall_threshold: float = 60.0):
        self.name = name
        self.total_steps = total_steps
        self.check_interval = check_interval  # seconds
        self.stall_threshold = stall_threshold  # seconds without a completed step
        self.monitoring_thread: Optional[threading.Thread] = None
        self.stop_event = threading.Event()
        self.process = psutil.Process(os.getpid())
        self.last_step = 0
        self.last_time = 0.0
        self.last_beat = time.monotonic()
        self.started_at = time.monotonic()
        self.peak_memory_mb = 0.0
        self._stall_reported = False

    def start(self):
        """Start the monitoring thread"""
        if self.monitoring_thread and self.monitoring_thread.is_alive():
            logger.warning(f"Monitor for {self.name} already running")
            return

        self.stop_event.clear()
        self.started_at = self.last_beat = time.monotonic()
        self.process.cpu_percent(interval=None)
        self._sample_memory()
        self.monitoring_thread = threading.Thread(target=self._monitor_loop, name=f"monitor-{self.name}")
        self.monitoring_thread.daemon = True
        self.monitoring_thread.start()
        logger.debug(f"Run monitor for {self.name} started")

    def stop(self) -> RunMetrics:
        """Stop the monitoring thread and return the collected metrics"""
        self.stop_event.set()
        if self.monitoring_thread:
            self.monitoring_thread.join(timeout=5)
        self._sample_memory()
        metrics = self.metrics()
        logger.debug(f"Run monitor for {self.name} stopped: {metrics}")
        return metrics

    def beat(self, step: int, sim_time: float):
        """Called by the integrator after each completed step"""
        self.last_step = step
        self.last_time = sim_time
        self.last_beat = time.monotonic()

    def metrics(self) -> RunMetrics:
        wall = time.monotonic() - self.started_at
        try:
            cpu = self.process.cpu_percent(interval=None)
        except (psutil.NoSuchProcess, psutil.AccessDenied):
            cpu = 0.0
        return RunMetrics(
            wall_seconds=wall,
            steps=self.last_step,
            steps_per_second=self.last_step / wall if wall > 0 else 0.0,
            peak_memory_mb=self.peak_memory_mb,
            cpu_percent=cpu,
        )

    def _sample_memory(self):
        try:
            rss_mb = self.process.memory_info().rss / (1024 * 1024)
        except (psutil.NoSuchProcess, psutil.AccessDenied) as e:
            logger.debug(f"Cannot read memory usage: {e}")
            return
        self.peak_memory_mb = max(self.peak_memory_mb, rss_mb)

    def _monitor_loop(self):
        """Main monitoring loop"""
        while not self.stop_event.wait(self.check_interval):
            try:
                self._check_run()
            except Exception as e:
                logger.error(f"Error in monitor loop of {self.name}: {e}")

    def _check_run(self):
        self._sample_memory()
        idle = time.monotonic() - self.last_beat
        if idle > self.stall_threshold:
            if not self._stall_reported:
                logger.warning(f"Run {self.name} stalled: no step completed for {idle:.0f}s "
                               f"(last step {self.last_step}, t={self.last_time:g})")
                self._stall_reported = True
            return
        self._stall_reported = False

        wall = time.monotonic() - self.started_at
        rate = self.last_step / wall if wall > 0 else 0.0
        progress = ""
        if self.total_steps:
            progress = f" ({100.0 * self.last_step / self.total_steps:.1f}%)"
        logger.info(f"Run {self.name}: step {self.last_step}{progress}, t={self.last_time:g}, "
                    f"{rate:.0f} steps/s, {self.peak_memory_mb:.0f} MB")
