#!/usr/bin/env python3
"""
Tests for the training monitor
"""

import inspect
import json
import sys
import tempfile
from datetime import datetime, timedelta
from pathlib import Path

import monitor
from monitor import TrainingMonitor


def make_monitor(tmp_path, **overrides):
    config = {'enabled': True, 'heartbeat_interval': 10, 'max_failures': 2,
              'heartbeat_file': str(tmp_path / 'heartbeat.json')}
    config.update(overrides)
    return TrainingMonitor(config)


def test_stalled_restarts_are_counted(tmp_path):
    mon = make_monitor(tmp_path)
    mon.heartbeat(0, 50, 0.6)
    mon.heartbeat(1, 50, 0.7)
    seen = mon.last_seen[0]

    assert mon.check_stalls(now=seen + timedelta(seconds=5)) == {0: 0, 1: 0}
    assert mon.check_stalls(now=seen + timedelta(seconds=25))[0] == 1
    assert mon.check_stalls(now=seen + timedelta(seconds=35))[0] == 2

    # a fresh heartbeat resets the count
    mon.heartbeat(0, 100, 0.8)
    assert mon.failure_counts[0] == 0


def test_finished_restarts_are_not_stalled(tmp_path):
    mon = make_monitor(tmp_path)
    mon.heartbeat(3, 0, 0.5)
    mon.finish(3)
    assert mon.check_stalls(now=datetime.now() + timedelta(hours=1)) == {}
    assert mon.get_status()['active_restarts'] == []
    assert mon.get_status()['progress'] == {'3': {'step': 0, 'best_fidelity': 0.5}}


def test_heartbeat_file(tmp_path):
    mon = make_monitor(tmp_path)
    mon.heartbeat(0, 150, 0.9)
    mon.write_heartbeat_file()
    status = json.loads((tmp_path / 'heartbeat.json').read_text(encoding='utf-8'))
    assert status['active_restarts'] == [0]
    assert status['progress']['0'] == {'step': 150, 'best_fidelity': 0.9}
    assert status['max_failures'] == 2
    assert status['memory_rss_mb'] > 0


def test_disabled_monitor_does_not_start(tmp_path):
    mon = make_monitor(tmp_path, enabled=False)
    assert mon.start() is False
    assert not mon.is_running


def test_global_monitor_lifecycle(tmp_path):
    mon = monitor.start_monitor({'enabled': True, 'heartbeat_interval': 60,
                                 'heartbeat_file': str(tmp_path / 'heartbeat.json')})
    try:
        assert mon is not None and mon.is_running
        assert monitor.start_monitor() is mon
        assert monitor.send_heartbeat(2, 50, 0.75) is True
        assert monitor.get_monitor_status()['active_restarts'] == [2]
        monitor.finish_restart(2)
    finally:
        assert monitor.stop_monitor()
    assert not mon.thread.is_alive()
    assert monitor.send_heartbeat(2, 100, 0.8) is False
    status = json.loads((tmp_path / 'heartbeat.json').read_text(encoding='utf-8'))
    assert status['running'] is False
    assert status['progress']['2']['step'] == 50


def main():
    """Run the tests without pytest"""
    print("🚀 Training monitor tests")
    tests = [(name, func) for name, func in globals().items() if name.startswith('test_') and callable(func)]
    passed = 0
    for name, func in tests:
        params = inspect.signature(func).parameters
        try:
            func(**({'tmp_path': Path(tempfile.mkdtemp())} if 'tmp_path' in params else {}))
            print(f"✅ {name}")
            passed += 1
        except Exception as e:
            print(f"❌ {name}: {e}")
    print(f"📊 Test Results: {passed}/{len(tests)} tests passed")
    return passed == len(tests)


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
