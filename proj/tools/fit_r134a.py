"""Fit the R134a correlation set used by the refprops library.

Requires CoolProp. Writes data/r134a.json and prints accuracy figures.
Usage: python3 tools/fit_r134a.py [output.json]
"""
import json
import sys

import numpy as np
import CoolProp.CoolProp as CP

FLUID = "R134a"
CP.set_reference_state(FLUID, "IIR")

T_MIN, T_MAX = 233.15, 348.15
T_REF = 273.15
T_C = CP.PropsSI("Tcrit", FLUID)
P_C = CP.PropsSI("pcrit", FLUID)
M = CP.PropsSI("molar_mass", FLUID)
R = 8.314462618 / M


def x_of(t):
    return (t - T_REF) / 100.0


temps = np.linspace(T_MIN, T_MAX, 116)
p_sat = np.array([CP.PropsSI("P", "T", t, "Q", 0, FLUID) for t in temps])
h_f = np.array([CP.PropsSI("H", "T", t, "Q", 0, FLUID) for t in temps])
h_g = np.array([CP.PropsSI("H", "T", t, "Q", 1, FLUID) for t in temps])
s_f = np.array([CP.PropsSI("S", "T", t, "Q", 0, FLUID) for t in temps])
rho_f = np.array([CP.PropsSI("D", "T", t, "Q", 0, FLUID) for t in temps])

# Wagner form: ln(P/Pc) * T/Tc = a1 tau + a2 tau^1.5 + a3 tau^2.5 + a4 tau^5
tau = 1.0 - temps / T_C
A = np.column_stack([tau, tau**1.5, tau**2.5, tau**5])
wagner, *_ = np.linalg.lstsq(A, np.log(p_sat / P_C) * temps / T_C, rcond=None)


def poly_fit_anchored(y, deg, anchor):
    x = x_of(temps)
    A = np.column_stack([x**k for k in range(1, deg + 1)])
    c, *_ = np.linalg.lstsq(A, y - anchor, rcond=None)
    return [anchor] + list(c)


hf_c = poly_fit_anchored(h_f, 5, 200000.0)
x = x_of(temps)
A = np.column_stack([x**k for k in range(0, 6)])
hg_c, *_ = np.linalg.lstsq(A, h_g, rcond=None)

# s_f = s_ref + c0 ln(T/Tref) + c1 (T - Tref)
A = np.column_stack([np.log(temps / T_REF), temps - T_REF])
cpl, *_ = np.linalg.lstsq(A, s_f - 1000.0, rcond=None)

A = np.column_stack([x**k for k in range(0, 4)])
rhof_c, *_ = np.linalg.lstsq(A, rho_f, rcond=None)

# Vapor cp per isobar, linear in the saturation temperature: fit the mean
# slope of h over 0..40 K of superheat.
rows, rhs = [], []
for t in temps[::3]:
    p = CP.PropsSI("P", "T", t, "Q", 1, FLUID)
    hg0 = CP.PropsSI("H", "T", t, "Q", 1, FLUID)
    for dt in np.linspace(2.0, 40.0, 20):
        h = CP.PropsSI("H", "P", p, "T", t + dt, FLUID)
        rows.append([dt, dt * t])
        rhs.append(h - hg0)
cpv, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)

# Vapor compressibility: Z = 1 + Pr (b0 + b1/Tr + b2/Tr^2 + b3/Tr^3)
rows, rhs = [], []
for t in temps[::3]:
    p = CP.PropsSI("P", "T", t, "Q", 1, FLUID)
    for dt in np.linspace(0.0, 60.0, 13):
        tt = t + dt
        d = CP.PropsSI("D", "P", p, "T", tt + (1e-6 if dt == 0 else 0), FLUID) if dt > 0 else CP.PropsSI("D", "T", t, "Q", 1, FLUID)
        z = p / (d * R * tt)
        pr, tr = p / P_C, tt / T_C
        rows.append([pr, pr / tr, pr / tr**2, pr / tr**3])
        rhs.append(z - 1.0)
zc, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)

doc = {
    "format": "refprops-correlation",
    "version": 1,
    "name": FLUID,
    "molar_mass": M,
    "t_min": T_MIN,
    "t_max": T_MAX,
    "t_superheat_max": 453.15,
    "t_crit": T_C,
    "p_crit": P_C,
    "reference": {"temperature": T_REF, "enthalpy": 200000.0, "entropy": 1000.0},
    "saturation_pressure_wagner": list(map(float, wagner)),
    "liquid_enthalpy_poly": list(map(float, hf_c)),
    "vapor_enthalpy_poly": list(map(float, hg_c)),
    "liquid_cp_linear": list(map(float, cpl)),
    "vapor_cp_linear": list(map(float, cpv)),
    "liquid_density_poly": list(map(float, rhof_c)),
    "vapor_compressibility": list(map(float, zc)),
}

out = sys.argv[1] if len(sys.argv) > 1 else "data/r134a.json"
with open(out, "w") as f:
    json.dump(doc, f, indent=2)
    f.write("\n")


def ev(c, t):
    return sum(ck * x_of(t) ** k for k, ck in enumerate(c))


def psat(t):
    tau = 1 - t / T_C
    return P_C * np.exp(T_C / t * (wagner[0] * tau + wagner[1] * tau**1.5 + wagner[2] * tau**2.5 + wagner[3] * tau**5))


print("max rel err psat", np.max(np.abs(psat(temps) / p_sat - 1)))
print("max rel err hf", np.max(np.abs(ev(hf_c, temps) / h_f - 1)))
print("max rel err hg", np.max(np.abs(ev(hg_c, temps) / h_g - 1)))
sf_fit = 1000 + cpl[0] * np.log(temps / T_REF) + cpl[1] * (temps - T_REF)
print("max abs err sf", np.max(np.abs(sf_fit - s_f)))
print("max rel err rhof", np.max(np.abs(ev(rhof_c, temps) / rho_f - 1)))
print("cpv", cpv, "zc", zc, "cpl", cpl)
