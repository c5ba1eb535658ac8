"""Regenerate data/toy_network.csv: a 5x6 bidirectional street grid."""
import math
import random
import sys

ROWS, COLS = 5, 6
LAT0, LON0 = 57.7000, 11.9700
LIMITS = [8.33, 11.11, 13.89, 16.67]


def main(path):
    rng = random.Random(20240501)
    elev = [[rng.uniform(0.0, 0.6) for _ in range(COLS)] for _ in range(ROWS)]
    lat = [LAT0 + r * 0.0025 for r in range(ROWS)]
    lon = [LON0 + c * 0.0040 for c in range(COLS)]

    def vid(r, c):
        return f"v{r * COLS + c}"

    segments = []
    for r in range(ROWS):
        for c in range(COLS):
            if c + 1 < COLS:
                segments.append(((r, c), (r, c + 1)))
            if r + 1 < ROWS:
                segments.append(((r, c), (r + 1, c)))

    rows = []
    for a, b in segments:
        length = round(rng.uniform(180.0, 420.0), 1)
        limit = rng.choice(LIMITS)
        for (r1, c1), (r2, c2) in ((a, b), (b, a)):
            incline = math.atan((elev[r2][c2] - elev[r1][c1]) / length)
            mean = round(limit * rng.uniform(0.55, 0.95), 2)
            var = round(rng.uniform(0.5, 3.0), 2)
            rows.append((vid(r1, c1), vid(r2, c2), length, round(incline, 6), limit, mean, var,
                         lat[r1], lon[c1], lat[r2], lon[c2]))

    with open(path, "w") as f:
        f.write("from_id,to_id,length_m,incline_rad,speed_limit_mps,mean_speed_mps,speed_var,"
                "lat1,lon1,lat2,lon2\n")
        for row in rows:
            src, dst, length, incline, limit, mean, var, la1, lo1, la2, lo2 = row
            f.write(f"{src},{dst},{length:.1f},{incline:.6f},{limit:.2f},{mean:.2f},{var:.2f},"
                    f"{la1:.4f},{lo1:.4f},{la2:.4f},{lo2:.4f}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/toy_network.csv")
