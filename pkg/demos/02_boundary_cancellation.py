"""Classify every codimension-one face for every labelled degree-1 and degree-2
diagram and watch all but the anomaly face cancel.  Degree 2 takes a minute or two.

Run: python3 demos/02_boundary_cancellation.py
"""
import json
import time

from kktz.faces import boundary_cancellation_check

for n in (1, 2):
    t0 = time.perf_counter()
    report = boundary_cancellation_check(n)
    print(f"degree {n} ({time.perf_counter() - t0:.1f}s)")
    print(json.dumps(report, indent=2))
