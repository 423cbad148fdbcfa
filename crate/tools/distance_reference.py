#!/usr/bin/env python3
"""High-precision reference evaluation of the four TSPLIB distance formulas.

Evaluates every test pair at 50 decimal digits with mpmath and prints the
frozen constant tables used by tests/acceptance.rs (criterion 1) and the
geographic unit tests. Also verifies that no pair sits within 1e-9 of a
rounding boundary, so the double-precision implementation cannot flip a
rounded value.

Run:  python3 tools/distance_reference.py
"""

from mpmath import mp, mpf, sqrt, floor, ceil, cos, acos, pi

mp.dps = 50

R_GEO = mpf("6378.388")


def nint(x):
    return int(floor(x + mpf("0.5")))


def euc_2d(xi, yi, xj, yj):
    d = sqrt((xi - xj) ** 2 + (yi - yj) ** 2)
    return nint(d), d + mpf("0.5")


def man_2d(xi, yi, xj, yj):
    d = abs(xi - xj) + abs(yi - yj)
    return nint(d), d + mpf("0.5")


def att(xi, yi, xj, yj):
    r = sqrt(((xi - xj) ** 2 + (yi - yj) ** 2) / 10)
    return int(ceil(r)), r


def ddmm_to_radians(x):
    deg = int(x)  # truncation toward zero
    minutes = x - deg
    return pi * (deg + mpf(5) * minutes / 3) / 180


def geo(xi, yi, xj, yj):
    lat_i, lon_i = ddmm_to_radians(xi), ddmm_to_radians(yi)
    lat_j, lon_j = ddmm_to_radians(xj), ddmm_to_radians(yj)
    q1 = cos(lon_i - lon_j)
    q2 = cos(lat_i - lat_j)
    q3 = cos(lat_i + lat_j)
    arg = ((1 + q1) * q2 - (1 - q1) * q3) / 2
    arg = max(mpf(-1), min(mpf(1), arg))
    d = R_GEO * acos(arg) + 1
    return int(floor(d)), d


# 25 coordinate pairs per distance type. Mixed by hand: axis-aligned, exact
# rounding boundaries, negative coordinates, box-scale magnitudes, and
# irrational in-between cases.
EUC_PAIRS = [
    (0, 0, 3, 4),
    (0, 0, 1, 1),
    (0, 0, 0.5, 0),
    (0, 0, 0.49999, 0),
    (0, 0, 1.5, 2.0),
    (-3, -4, 0, 0),
    (10, 10, 10, 10.4),
    (1e6, 1e6, 0, 0),
    (123456.7, 987654.3, 234567.8, 876543.2),
    (0.1, 0.2, 0.3, 0.4),
    (5, 5, 8, 9),
    (-100.5, 200.25, 300.75, -400.125),
    (0, 0, 0.707, 0.707),
    (17, 31, 17, 31.49),
    (17, 31, 17, 31.51),
    (250000, 250000, 750000, 750000),
    (1, 2, 4, 6),
    (-1e5, 5e5, 9e5, -2e5),
    (3.25, 4.75, 9.5, 1.125),
    (0, 0, 6, 8),
    (2.5, 2.5, 5.0, 6.0),
    (999999.9, 0.1, 0.2, 999999.8),
    (42, 42, 42, 42),
    (7.125, 8.375, 1.625, 3.875),
    (0, 0, 1e-3, 1e-3),
]

MAN_PAIRS = [
    (0, 0, 3, 4),
    (0, 0, 0.25, 0.25),
    (0, 0, 0.25, 0.24999),
    (-3, -4, 0, 0),
    (10, 10, 10, 10.4),
    (10, 10, 10, 10.5),
    (1e6, 1e6, 0, 0),
    (123456.7, 987654.3, 234567.8, 876543.2),
    (0.1, 0.2, 0.3, 0.4),
    (5, 5, 8, 9),
    (-100.5, 200.25, 300.75, -400.125),
    (1.1, 2.2, 3.3, 4.4),
    (17, 31, 17, 31.49),
    (17, 31, 17, 31.51),
    (250000, 250000, 750000, 750000),
    (1, 2, 4, 6),
    (-1e5, 5e5, 9e5, -2e5),
    (3.25, 4.75, 9.5, 1.125),
    (0, 0, 6, 8),
    (2.5, 2.5, 5.0, 6.0),
    (999999.9, 0.1, 0.2, 999999.8),
    (42, 42, 42, 42),
    (7.125, 8.375, 1.625, 3.875),
    (0, 0, 1e-3, 1e-3),
    (-0.75, -0.75, 0.75, 0.75),
]

ATT_PAIRS = [
    (0, 0, 3, 4),
    (0, 0, 5, 15),       # squared distance 250 -> exactly 5
    (0, 0, 10, 0),       # squared distance 100 -> sqrt(10)
    (0, 0, 0, 0),
    (0, 0, 1, 0),
    (0, 0, 10, 30),      # squared distance 1000 -> exactly 10
    (-5, -15, 0, 0),
    (1e6, 1e6, 0, 0),
    (123456.7, 987654.3, 234567.8, 876543.2),
    (0.1, 0.2, 0.3, 0.4),
    (5, 5, 8, 9),
    (-100.5, 200.25, 300.75, -400.125),
    (0, 0, 20, 60),      # squared distance 4000 -> exactly 20
    (17, 31, 17, 31.49),
    (250000, 250000, 750000, 750000),
    (1, 2, 4, 6),
    (-1e5, 5e5, 9e5, -2e5),
    (3.25, 4.75, 9.5, 1.125),
    (0, 0, 6, 8),
    (2.5, 2.5, 5.0, 6.0),
    (999999.9, 0.1, 0.2, 999999.8),
    (0, 0, 30, 90),      # squared distance 9000 -> exactly 30
    (7.125, 8.375, 1.625, 3.875),
    (0, 0, 1e-3, 1e-3),
    (0, 0, 40, 120),     # squared distance 16000 -> exactly 40
]

# GEO coordinates are DDD.MM: integer part degrees, fraction literal minutes.
GEO_PAIRS = [
    (40.30, -73.59, 40.30, -73.59),   # identical points
    (0, 0, 0, 0),
    (38.24, 20.42, 39.57, 26.15),     # ulysses16 cities 1-2
    (38.24, 20.42, 40.56, 25.32),     # ulysses16 cities 1-3
    (39.57, 26.15, 40.56, 25.32),     # ulysses16 cities 2-3
    (36.26, 23.12, 33.48, 10.54),
    (37.56, 12.19, 38.42, 13.11),
    (-35.00, -58.30, 51.30, 0.07),
    (90.00, 0, -90.00, 0),            # pole to pole
    (0, -179.59, 0, 179.59),          # across the antimeridian
    (45.30, 100.00, -45.30, -80.00),
    (10.10, 10.10, 10.10, 10.20),
    (79.59, 0, 80.00, 0),
    (-80.00, -179.59, 80.00, 179.59),
    (0.30, 0.30, -0.30, -0.30),
    (55.45, 37.37, 40.45, -73.59),    # Moscow-ish to New York-ish
    (35.40, 139.45, 37.46, -122.25),  # Tokyo-ish to SF-ish
    (1.17, 103.51, 1.18, 103.52),
    (60.10, 24.56, 59.20, 18.03),
    (-33.52, 151.12, -37.49, 144.58),
    (20.00, 0, 20.00, 0.01),
    (0, 0, 0.01, 0),
    (48.51, 2.21, 51.30, -0.07),
    (70.00, -70.00, -70.00, 70.00),
    (12.34, 56.47, -12.34, -56.47),
]


def rust_f(x):
    s = repr(float(x))
    if "." not in s and "e" not in s and "inf" not in s:
        s += ".0"
    return s


def emit_rust(name, pairs, f):
    print(f"const {name}: [(f64, f64, f64, f64, i64); {len(pairs)}] = [")
    for (xi, yi, xj, yj) in pairs:
        # mpf(float) converts the binary double exactly, so the reference
        # evaluates the same inputs the f64 implementation sees.
        d, raw = f(mpf(float(xi)), mpf(float(yi)), mpf(float(xj)), mpf(float(yj)))
        frac = raw - floor(raw)
        margin = min(frac, 1 - frac)
        # A zero margin is an exact boundary, which both the reference and the
        # f64 implementation hit exactly; anything else must stay clear of it.
        if margin != 0 and margin < mpf("1e-9"):
            raise SystemExit(f"pair {(xi, yi, xj, yj)} too close to boundary: raw={raw}")
        print(f"    ({rust_f(xi)}, {rust_f(yi)}, {rust_f(xj)}, {rust_f(yj)}, {d}),")
    print("];")


if __name__ == "__main__":
    emit_rust("EUC_2D_REFERENCE", EUC_PAIRS, euc_2d)
    print()
    emit_rust("MAN_2D_REFERENCE", MAN_PAIRS, man_2d)
    print()
    emit_rust("ATT_REFERENCE", ATT_PAIRS, att)
    print()
    emit_rust("GEO_REFERENCE", GEO_PAIRS, geo)
