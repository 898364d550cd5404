"""Walkthrough: training and comparing the two gesture classifiers.

The one-vs-rest linear SVM and the 30-hidden-unit network learn the same
15-gesture vocabulary. On well-separated landmark data the SVM trains
faster and at least matches the network's accuracy, so it is the default
choice for live use.
"""

import time

from natcmd import (
    DEFAULT_GESTURE_LABELS,
    MlpConfig,
    SvmConfig,
    SyntheticSpec,
    evaluate_model,
    generate_synthetic_dataset,
    predict,
    split_dataset,
    train_linear_svm,
    train_mlp,
)
from natcmd.metrics import render_report

spec = SyntheticSpec(
    label_set=DEFAULT_GESTURE_LABELS,
    frames_per_label=200,  # 1000 in the full regime; 200 keeps the demo quick
    noise_sigma=0.01,
    seed=42,
)
ds = generate_synthetic_dataset(spec)
train, test = split_dataset(ds, 0.8, seed=42)
print(f"training on {len(train)} frames, testing on {len(test)}")

svm = train_linear_svm(train, SvmConfig(c=1.0, seed=42))
mlp = train_mlp(train, MlpConfig(hidden_units=30, seed=42))

for name, model in (("linear svm", svm), ("mlp 63-30-15", mlp)):
    report = evaluate_model(model, test)
    print(f"\n=== {name} ===")
    print(render_report(report).splitlines()[0])
    print(f"accuracy {report.accuracy:.4f}  precision {report.macro_precision:.4f}  "
          f"recall {report.macro_recall:.4f}  f1 {report.f1:.4f}")
    print(f"mean prediction time {report.mean_prediction_time_ms:.4f} ms")

faster = "svm" if svm.training_time_ms < mlp.training_time_ms else "mlp"
print(f"\ntraining time: svm {svm.training_time_ms:.0f} ms vs "
      f"mlp {mlp.training_time_ms:.0f} ms ({faster} is faster)")

# single-frame prediction, as the live video loop would do it
frame = test.frames[0]
t0 = time.perf_counter()
pred = predict(svm, frame)
print(f"\none frame -> {pred.label!r} "
      f"(true {test.labels[0]!r}) in {(time.perf_counter() - t0) * 1000:.3f} ms")
