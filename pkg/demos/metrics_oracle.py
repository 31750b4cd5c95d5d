"""Recompute macro-F1 from two reference 2x2 confusion matrices.

Rows are the true class (Female, Male), columns the prediction.
"""
from gaitrel.metrics import ConfusionMatrix2, evaluate, format_report

for name, flat in [("validation", [191, 43, 56, 193]), ("test", [319, 102, 100, 330])]:
    print(f"== {name}")
    print(format_report(evaluate(ConfusionMatrix2.from_flat(flat))))
