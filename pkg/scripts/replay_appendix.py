"""Replay the bundled step-by-step derivation against the appendix constraints."""
from sdsproof.appendix import appendix_system
from sdsproof.verify import load_proof_script, replay_proof

report = replay_proof(load_proof_script(), appendix_system())
for s in report.steps:
    verdict = "ok " if s.passed else "BAD"
    kind = "control" if not s.step.expect_holds else "step"
    print(f"{verdict} {kind:<7} {s.step.name}")
print(f"{sum(s.passed for s in report.steps)}/{len(report.steps)} passed, {report.branches} branches")
raise SystemExit(0 if report.passed else 1)
