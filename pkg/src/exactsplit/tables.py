"""Published reference coefficients, kept verbatim as decimal strings.

Each table records the preset it belongs to, the step it was computed at and
the printed values.  Comparisons are made with :func:`compare_table`, which
reports the largest deviation relative to the largest printed entry of each
matrix (the tables print a fixed number of decimals, not significant digits).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _m(rows):
    return np.array([[float(v) for v in r.split()] for r in rows])


def _v(s):
    return np.array([float(v) for v in s.split()])


SHEAR_3D = dict(
    preset="transport3d", dt=0.3, pivot=2,
    y_left=_v("0.345224363827786 0.379204563977292 0"),
    y_mid={0: _v("0 -0.036460351430518 -0.664426864374562"),
           1: _v("0.036504386840795 0 -0.742627150015417")},
    y_right=_v("0.339075826535304 0.384712290654848 0"),
)

SHEAR_4D = dict(
    preset="transport4d", dt=0.05, pivot=1,
    y_left=_v("7.239003439520237 0 0.114915806141710 5.520828626111525"),
    y_mid={0: _v("0 -0.843365270467026 1.542035786578973 3.239936743553417"),
           2: _v("-2.171812638482090 1.937050589058292 0 -0.368205582274782"),
           3: _v("-3.333162655369549 0.915289658696578 0.087822505478295 0")},
    y_right=_v("-7.124076298503538 0 -1.578152453772511 -5.445447353939971"),
)

TRIANGULAR = {
    "qm2d-magnetic": dict(
        dt=0.3,
        A=_m(["0.503532819405421 -0.074439184790650",
              "-0.074439184790650 0.503784060194312"]),
        L=_m(["0 0", "-16.121089926218119 0"]),
        U=_m(["0 15.761077688604765", "0 0"]),
        V_left=_m(["128.9687194097432 0", "0 -0.0000000000018"]),
        V_right=_m(["2.8800979009085 -19.0564313064080",
                    "-19.0564313064080 126.0886215088400"]),
    ),
    "gpe2d-rot": dict(
        dt=1e-3,
        A=_m(["0.499999979166481 0.000249999948070",
              "0.000249999948070 0.499999979166811"]),
        L=_m(["0 0", "0.500000041666386 0"]),
        U=_m(["0 -0.499999916666976", "0 0"]),
        V_left=_m(["0.312500037673140 0", "0 0.187500011883192"]),
        V_right=_m(["0.187500043056181 0.000062500002332",
                    "0.000062500002332 0.312500006345821"]),
    ),
    "gpe2d-still": dict(
        dt=1e-3,
        A=_m(["0.499999916666670 0", "0 0.499999916666676"]),
        L=_m(["0 0", "0 0"]),
        U=_m(["0 0", "0 0"]),
        V_left=_m(["0.250000020830132 0", "0 0.250000020802363"]),
        V_right=_m(["0.250000020836539 0", "0 0.250000020864292"]),
    ),
    "gpe2d-aniso": dict(
        dt=1e-3,
        A=_m(["0.500000110624718 -0.000449999864087",
              "-0.000449999864087 0.500000127291716"]),
        L=_m(["0 0", "-0.900000273000100 0"]),
        U=_m(["0 0.899999484000032", "0 0"]),
        V_left=_m(["0.478125137872035 0", "0 0.023124993175043"]),
        V_right=_m(["0.073125336336629 -0.000364499913716",
                    "-0.000364499913716 0.428124781225271"]),
    ),
    "qm3d-periodic": dict(
        dt=0.2,
        A=_m(["0.503369336514750 0.09260872887966 -0.086577853155386",
              "0.092608728879667 0.499175997238123 0.090475411725230",
              "-0.086577853155386 0.090475411725230 0.482430618251455"]),
        V_left=_m(["1.838313777101704 0 0",
                   "0 1.405233579215994 0",
                   "0 0 2.416160688906186"]),
        V_right=_m(["0.765638127548775 0.097739062052903 -0.244124321719139",
                    "0.097739062052903 1.408683914880933 0.141925135897144",
                    "-0.244124321719139 0.14192513589714 3.535113753227984"]),
        L=_m(["0 0 0",
              "0.957867410476376 0 0",
              "-0.917880413070041 1.133563918623215 0"]),
        U=_m(["0 -1.132325985517193 0.915677911046419",
              "0 0 -0.957661219232001",
              "0 0 0"]),
    ),
    "qm3d-magnetic": dict(
        dt=0.1,
        A=_m(["0.506160069704187 0.098840554692409 0.001683128724191",
              "0.098840554692409 0.508317718832811 0.050167780151672",
              "0.001683128724191 0.050167780151672 0.501715861437068"]),
        V_left=_m(["2.025343613765655 0 0",
                   "0 0.508168767491105 0",
                   "0 0 0.000099459606977"]),
        V_right=_m(["0.072891278447532 0.242556937819776 -1.026420948565178",
                    "0.242556937819776 1.959142247295385 -0.046535665904951",
                    "-1.026420948565178 -0.046535665904951 0.508102737430800"]),
        L=_m(["0 0 0",
              "2.003434507092443 0 0",
              "-0.099043028107977 1.016569585390557 0"]),
        U=_m(["0 -1.963756896350695 -0.099988990937417",
              "0 0 -1.006635420674690",
              "0 0 0"]),
    ),
}

# Printed approximations of the roots defining the periodic 3D potential.
PERIODIC_LAMBDAS = _v("2.27017996551810 2.53418020791380 5.22286204879033")


@dataclass
class TableComparison:
    name: str
    entry: str
    deviation: float
    scale: float

    @property
    def relative(self) -> float:
        return self.deviation / max(self.scale, 1e-300)


def compare_arrays(name: str, entry: str, computed, printed) -> TableComparison:
    computed = np.asarray(computed, dtype=float)
    printed = np.asarray(printed, dtype=float)
    dev = float(np.max(np.abs(computed - printed)))
    return TableComparison(name, entry, dev, float(np.max(np.abs(printed))) or 1.0)


def compare_triangular(name: str, ts) -> list:
    ref = TRIANGULAR[name]
    return [compare_arrays(name, key, getattr(ts, key), ref[key])
            for key in ("A", "L", "U", "V_left", "V_right")]


def compare_shears(name: str, fact, ref: dict) -> list:
    out = [compare_arrays(name, "y_left", fact.y_left, ref["y_left"]),
           compare_arrays(name, "y_right", fact.y_right, ref["y_right"])]
    for k, y in ref["y_mid"].items():
        out.append(compare_arrays(name, f"y_mid[{k}]", fact.y_mid[k], y))
    return out
