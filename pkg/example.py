#!/usr/bin/env python3
"""Example usage of the cavity_thermo library."""

from cavity_thermo import CavityEngine, SweepConfig, analytic_empty_cavity, preset

# Example 1: One steady state in both frameworks
print("=" * 60)
print("Example 1: Driven Kerr Cavity")
print("=" * 60)

engine = CavityEngine.from_preset("kerr", {"drive.delta": 1.0})
report = engine.report()

print(f"\n{'':<14}{'conventional':>16}{'input-output':>16}")
print(f"{'power':<14}{report.P_conv:>16.6g}{report.P_io:>16.6g}")
print(f"{'cavity heat':<14}{report.J_c_conv:>16.6g}{report.J_c_io:>16.6g}")
print(f"{'production':<14}{report.Sigma_conv:>16.6g}{report.Sigma_io:>16.6g}")
print(f"\nOutput field b_out = {report.b_out_coherent:.6g}")

# Example 2: Audit of every identity
print("\n" + "=" * 60)
print("Example 2: Audit")
print("=" * 60)

audit = engine.audit()
print(f"\nAudit {'passed' if audit.passed else 'FAILED'} ({len(audit.checks)} checks)")
for check in audit.failures:
    print(f"  {check.name}: residual {check.residual:.3e} > {check.tolerance:.3e}")

# Example 3: Empty cavity against its closed form
print("\n" + "=" * 60)
print("Example 3: Empty Cavity Oracle")
print("=" * 60)

empty = CavityEngine(preset("empty", {"n_max": 40}))
numeric = empty.report()
exact = analytic_empty_cavity(1.0, 0.1, 0.0, 0.5, 1e4)
print(f"\n<a>    numeric {numeric.a_mean:.10f}  exact {exact.a_mean:.10f}")
print(f"P_conv numeric {numeric.P_conv:.10f}  exact {exact.P_conv:.10f}")

# Example 4: Detuning families at two bath occupations
print("\n" + "=" * 60)
print("Example 4: Sweep")
print("=" * 60)

config = SweepConfig.linear(
    "drive.delta",
    -2.0,
    2.0,
    5,
    series="channels.cavity.occupation",
    series_values=[0.0, 0.5],
    outputs=["T_Sigma_conv", "T_Sigma_io"],
)
table = engine.sweep(config)
print("\n" + ",".join(table.columns))
for row in table.rows:
    print(",".join(f"{row[c]:.6g}" for c in table.columns))
