"""Build a nested collapse tree, send a chart point through xi and back through r.

Run: python3 demos/03_charts.py
"""
import numpy as np

from kktz import charts as C

rng = np.random.default_rng(2024)
t = C.random_tree(rng)
print("tree:", t.to_json())
print("valid:", C.validate_tree(t), "codimension:", C.codim(t))
P = C.random_chart_point(rng, t)
Q = C.chart_xi(P, t)
print("realized configuration:\n", C.realized_map(Q, t))
print("conditions:", C.finite_conditions(Q, t))
R = C.retraction_r(Q, t)
print("round trip error:", C.chart_distance(P, R, t))

ti = C.random_infinity_tree(rng)
Pi = C.random_infinity_point(rng, ti)
x, _ = C.realized_map_infty(C.chart_xi_infty(Pi, ti), ti)
print("\ninfinity tree:", ti.to_json())
print("points far away:\n", x)
print("round trip error:", C.chart_distance(Pi, C.retraction_r_infty(C.chart_xi_infty(Pi, ti), ti), ti))
