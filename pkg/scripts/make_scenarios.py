#!/usr/bin/env python3
"""Regenerate the scenario files shipped under scenarios/.

The reference geometry: terminals on a lane along x spaced 0.7 m, a unit
point target at (0, 20) m, 28 GHz carrier. Arrays are half-wavelength
ULAs sized so a single terminal resolves 0.30 m in both range (500 MHz
band) and cross-range (0.713 m receive aperture at 20 m stand-off).
"""

import json
from pathlib import Path

C = 3.0e8
F0 = 28e9
BW = 500e6
LAM = C / F0
M_RX = 134  # (M-1) * lam/2 = 0.7125 m receive aperture

OUT = Path(__file__).resolve().parent.parent / "scenarios"


def ula(xc, yc, count, spacing):
    half = (count - 1) / 2
    return [[xc + (i - half) * spacing, yc] for i in range(count)]


def lane_terminal(term_id, xc, m_rx=M_RX):
    return {
        "id": term_id,
        "phase_center": [xc, 0.0],
        "tx_elements": [[xc, 0.0]],
        "rx_elements": ula(xc, 0.0, m_rx, LAM / 2),
    }


def write(name, doc):
    OUT.mkdir(exist_ok=True)
    path = OUT / name
    path.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {path}")


def main():
    target = {"position": [0.0, 20.0], "reflectivity": [1.0, 0.0]}

    write(
        "lane_single_terminal.json",
        {
            "terminals": [lane_terminal(0, 0.0)],
            "targets": [target],
            "f0_hz": F0,
            "bandwidth_hz": BW,
        },
    )

    write(
        "lane_multistatic.json",
        {
            "terminals": [lane_terminal(i, -1.4 + 0.7 * i) for i in range(5)],
            "targets": [target],
            "f0_hz": F0,
            "bandwidth_hz": BW,
            "pairing": [[1] * 5 for _ in range(5)],
        },
    )

    # one illuminator above the scene, receive-only users on the lane:
    # the opposite-side geometry where bistatic pairs lose (nearly) all
    # resolution along y
    users = [
        {
            "id": 1 + i,
            "phase_center": [0.7 * (i + 1), 0.0],
            "tx_elements": [],
            "rx_elements": [[0.7 * (i + 1), 0.0]],
        }
        for i in range(5)
    ]
    pairing = [[0] * 6 for _ in range(6)]
    pairing[0][0] = 1  # illuminator images monostatically too
    for k in range(1, 6):
        pairing[0][k] = 1
    write(
        "opposite_side.json",
        {
            "terminals": [
                {
                    "id": 0,
                    "phase_center": [0.0, 40.0],
                    "tx_elements": [[0.0, 40.0]],
                    "rx_elements": ula(0.0, 40.0, M_RX, LAM / 2),
                }
            ]
            + users,
            "targets": [target],
            "f0_hz": F0,
            "bandwidth_hz": BW,
            "pairing": pairing,
        },
    )

    # narrowband single terminal: the starting point for orchestration
    write(
        "lane_base_100mhz.json",
        {
            "terminals": [
                {
                    "id": 0,
                    "phase_center": [0.0, 0.0],
                    "tx_elements": [[0.0, 0.0]],
                    "rx_elements": [[0.0, 0.0]],
                }
            ],
            "targets": [target],
            "f0_hz": F0,
            "bandwidth_hz": 100e6,
        },
    )


if __name__ == "__main__":
    main()
