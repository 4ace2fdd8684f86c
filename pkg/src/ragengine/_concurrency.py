"""A small counting reader-writer lock.

Many readers may hold the lock at once; a writer excludes everyone.
Used by the hybrid index and the semantic cache so searches never
observe a partially applied mutation.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager


class RWLock:
    def __init__(self) -> None:
        self._readers = 0
        self._counter_lock = threading.Lock()
        self._writer_lock = threading.Lock()

    @contextmanager
    def read(self):
        with self._counter_lock:
            self._readers += 1
            if self._readers == 1:
                self._writer_lock.acquire()
        try:
            yield
        finally:
            with self._counter_lock:
                self._readers -= 1
                if self._readers == 0:
                    self._writer_lock.release()

    @contextmanager
    def write(self):
        with self._writer_lock:
            yield
