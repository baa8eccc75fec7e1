#!/usr/bin/env python3
"""
Training Monitor for qteach
Receives heartbeats from running restarts, flags stalled ones and keeps a
heartbeat file with progress and process memory up to date
"""

import json
import logging
import os
import threading
import time
from datetime import datetime, timedelta
from pathlib import Path
from typing import Any, Dict, Optional

import psutil


class TrainingMonitor:
    """Background monitor for training restarts"""

    def __init__(self, config: Dict[str, Any] = None):
        """Initialize monitor"""
        self.config = config or {}
        self.enabled = self.config.get('enabled', True)
        self.heartbeat_interval = float(self.config.get('heartbeat_interval', 10))
        self.max_failures = int(self.config.get('max_failures', 3))
        self.heartbeat_file = Path(self.config.get('heartbeat_file', 'logs/heartbeat.json'))

        self.started_at: Optional[datetime] = None
        self.progress: Dict[int, Dict[str, Any]] = {}
        self.last_seen: Dict[int, datetime] = {}
        self.failure_counts: Dict[int, int] = {}
        self.is_running = False
        self.thread = None
        self._lock = threading.Lock()
        self._stop_event = threading.Event()
        self.logger = logging.getLogger(__name__)

    def start(self) -> bool:
        """Start the monitor thread"""
        if not self.enabled:
            self.logger.info("Training monitor disabled in configuration")
            return False

        if self.is_running:
            self.logger.warning("Training monitor already running")
            return True

        try:
            self.is_running = True
            self.started_at = datetime.now()
            self._stop_event.clear()
            self.thread = threading.Thread(target=self._monitor_loop, daemon=True)
            self.thread.start()
            self.logger.info("Training monitor started")
            return True
        except Exception as e:
            self.logger.error(f"Failed to start training monitor: {e}")
            self.is_running = False
            return False

    def stop(self) -> bool:
        """Stop the monitor and write a final heartbeat file"""
        if not self.is_running:
            return True

        try:
            self.is_running = False
            self._stop_event.set()
            if self.thread and self.thread.is_alive():
                self.thread.join(timeout=5)
            self.write_heartbeat_file()
            self.logger.info("Training monitor stopped")
            return True
        except Exception as e:
            self.logger.error(f"Error stopping training monitor: {e}")
            return False

    def heartbeat(self, restart_index: int, step: int, best_fidelity: float) -> bool:
        """Record progress of one restart"""
        with self._lock:
            self.last_seen[restart_index] = datetime.now()
            self.failure_counts[restart_index] = 0
            self.progress[restart_index] = {'step': step, 'best_fidelity': best_fidelity}
        self.logger.debug(f"Heartbeat from restart {restart_index} at step {step}")
        return True

    def finish(self, restart_index: int) -> None:
        """Stop tracking a restart that has returned"""
        with self._lock:
            self.last_seen.pop(restart_index, None)
            self.failure_counts.pop(restart_index, None)

    def check_stalls(self, now: Optional[datetime] = None) -> Dict[int, int]:
        """Bump the failure count of every restart silent for over two intervals"""
        now = now or datetime.now()
        max_allowed_time = timedelta(seconds=self.heartbeat_interval * 2)
        with self._lock:
            for restart_index, seen in self.last_seen.items():
                if now - seen <= max_allowed_time:
                    continue
                self.failure_counts[restart_index] = self.failure_counts.get(restart_index, 0) + 1
                count = self.failure_counts[restart_index]
                if count >= self.max_failures:
                    self.logger.error(f"Restart {restart_index} stalled: no heartbeat for "
                                      f"{(now - seen).total_seconds():.0f}s ({count} failures)")
                else:
                    self.logger.warning(f"Heartbeat timeout for restart {restart_index}. Failure count: {count}")
            return dict(self.failure_counts)

    def _monitor_loop(self):
        """Main monitoring loop"""
        self.logger.info("Training monitor loop started")

        while not self._stop_event.wait(self.heartbeat_interval):
            try:
                self.check_stalls()
                self.write_heartbeat_file()
            except Exception as e:
                self.logger.error(f"Error in training monitor loop: {e}")

    def write_heartbeat_file(self) -> None:
        """Save the current status as JSON"""
        try:
            self.heartbeat_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.heartbeat_file, 'w', encoding='utf-8') as f:
                json.dump(self.get_status(), f, indent=2)
        except Exception as e:
            self.logger.error(f"Error saving heartbeat file: {e}")

    def get_status(self) -> Dict[str, Any]:
        """Get monitor status"""
        memory = psutil.Process(os.getpid()).memory_info()
        with self._lock:
            return {
                'timestamp': datetime.now().isoformat(),
                'uptime': (datetime.now() - self.started_at).total_seconds() if self.started_at else 0.0,
                'enabled': self.enabled,
                'running': self.is_running,
                'active_restarts': sorted(self.last_seen),
                'progress': {str(k): dict(v) for k, v in sorted(self.progress.items())},
                'failure_counts': {str(k): v for k, v in sorted(self.failure_counts.items())},
                'max_failures': self.max_failures,
                'heartbeat_interval': self.heartbeat_interval,
                'memory_rss_mb': memory.rss / 2 ** 20,
            }


# Global monitor instance
_monitor_instance = None


def start_monitor(config: Dict[str, Any] = None) -> Optional[TrainingMonitor]:
    """Start the global monitor instance"""
    global _monitor_instance

    try:
        if _monitor_instance and _monitor_instance.is_running:
            return _monitor_instance

        _monitor_instance = TrainingMonitor(config)
        if _monitor_instance.start():
            return _monitor_instance
        return None
    except Exception as e:
        logging.error(f"Failed to start training monitor: {e}")
        return None


def stop_monitor() -> bool:
    """Stop the global monitor instance"""
    try:
        if _monitor_instance:
            return _monitor_instance.stop()
        return True
    except Exception as e:
        logging.error(f"Failed to stop training monitor: {e}")
        return False


def send_heartbeat(restart_index: int, step: int, best_fidelity: float) -> bool:
    """Progress callback for the trainer; a no-op when no monitor is running"""
    if _monitor_instance and _monitor_instance.is_running:
        return _monitor_instance.heartbeat(restart_index, step, best_fidelity)
    return False


def finish_restart(restart_index: int) -> None:
    if _monitor_instance:
        _monitor_instance.finish(restart_index)


def get_monitor_status() -> Dict[str, Any]:
    """Get status of the global monitor instance"""
    if _monitor_instance:
        return _monitor_instance.get_status()
    return {
        'enabled': False,
        'running': False,
        'active_restarts': [],
        'progress': {},
        'failure_counts': {},
        'max_failures': 3,
        'heartbeat_interval': 10,
    }


def main():
    """Test monitor functionality"""
    print("🔧 Testing training monitor...")

    monitor = start_monitor({'enabled': True, 'heartbeat_interval': 1, 'max_failures': 2})
    if not monitor:
        print("❌ Failed to start training monitor")
        return

    print("✅ Training monitor started")
    for step in (50, 100, 150):
        time.sleep(0.5)
        if send_heartbeat(0, step, 0.5 + step / 1000):
            print(f"✅ Heartbeat at step {step} sent")
    print(f"📊 Status: {get_monitor_status()}")
    if stop_monitor():
        print("✅ Training monitor stopped")


if __name__ == "__main__":
    main()
