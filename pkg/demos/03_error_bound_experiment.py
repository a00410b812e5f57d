"""Run a seeded synthetic experiment and check the computable error bound.

For every supported query the harness evaluates a bound built from the
weights, the assumed Lipschitz constant, and the realized noises; the true
squared error can never exceed the bound squared.  Without noise the bound
collapses to l1 * delta.
"""

import pathlib

import rdwo

spec_path = pathlib.Path(__file__).parent / "data" / "sine_experiment.json"
spec = rdwo.load_spec(spec_path)
print(f"experiment: {spec.function} on {spec.input_range}, "
      f"n = {spec.n_samples}, noise sigma = {spec.noise_sigma}, seed = {spec.seed}")
print(f"estimator: delta = {spec.config.delta}, l1 = {spec.config.l1}")
print()

report = rdwo.run_experiment(spec, mode="batch")
print(f"{'x':>6} {'truth':>9} {'estimate':>9} {'|error|':>9} {'bound z':>9}  ok")
for r in report.records:
    if r.estimate is None:
        print(f"{r.x:6.2f} {r.truth:9.4f} {'-':>9} {'-':>9} {'-':>9}  no support")
        continue
    print(
        f"{r.x:6.2f} {r.truth:9.4f} {r.estimate:9.4f} {r.abs_error:9.4f} "
        f"{r.bound_z:9.4f}  {r.bound_holds}"
    )
print()
print(f"supported queries : {report.supported_count}")
print(f"bound violations  : {report.violation_count}")
print(f"mean |error|      : {report.mean_abs_error:.5f}")
print(f"max  |error|      : {report.max_abs_error:.5f}")

streaming = rdwo.run_experiment(spec, mode="streaming")
dev = rdwo.max_relative_deviation(report, streaming)
print(f"batch vs streaming: max relative deviation = {dev:.2e}")

# Noiseless collapse: with sigma = 0 every error is below l1 * delta.
import dataclasses

quiet = dataclasses.replace(spec, noise_sigma=0.0)
quiet_report = rdwo.run_experiment(quiet, mode="batch")
cap = quiet.config.l1 * quiet.config.delta
print()
print(f"noiseless rerun: max |error| = {quiet_report.max_abs_error:.5f} "
      f"<= l1 * delta = {cap}")
