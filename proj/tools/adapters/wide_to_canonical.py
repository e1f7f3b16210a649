#!/usr/bin/env python3
"""Convert a wide RSSI table (one row per test point, one column per anchor)
into the canonical long CSV read by pfdoa.

Example:
    wide_to_canonical.py raw.csv out.csv --x X --y Y \
        --anchor TX1=T1 --anchor TX2=T2 --anchor TX3=T3 --technology wifi

Rows whose anchor cell is empty (or equal to --missing) are skipped for that
anchor; the loader imputes them later.
"""

import argparse
import csv
import sys

HEADER = ["point_id", "x", "y", "anchor_id", "rssi", "channel", "technology"]


def parse_args(argv):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--x", required=True, help="x coordinate column")
    p.add_argument("--y", required=True, help="y coordinate column")
    p.add_argument("--anchor", action="append", required=True, metavar="COLUMN=ID",
                   help="RSSI column and the anchor id it maps to (repeatable)")
    p.add_argument("--point-id", help="point id column (default: row number)")
    p.add_argument("--channel", help="channel column")
    p.add_argument("--fixed-channel", type=int, help="channel value for every row")
    p.add_argument("--technology", required=True, choices=["wifi", "ble", "zigbee", "simulated"])
    p.add_argument("--scale", type=float, default=1.0, help="multiply coordinates (e.g. 0.01 for cm)")
    p.add_argument("--offset-x", type=float, default=0.0)
    p.add_argument("--offset-y", type=float, default=0.0)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--missing", default="", help="cell value that marks a missing reading")
    return p.parse_args(argv)


def main(argv):
    args = parse_args(argv)
    mapping = []
    for item in args.anchor:
        col, sep, anchor_id = item.partition("=")
        if not sep or not col or not anchor_id:
            sys.exit(f"--anchor expects COLUMN=ID, got {item!r}")
        mapping.append((col, anchor_id))

    with open(args.input, newline="", encoding="utf-8-sig") as fin:
        reader = csv.DictReader(fin, delimiter=args.delimiter)
        needed = [args.x, args.y] + [c for c, _ in mapping]
        if args.point_id:
            needed.append(args.point_id)
        if args.channel:
            needed.append(args.channel)
        absent = [c for c in needed if c not in (reader.fieldnames or [])]
        if absent:
            sys.exit(f"missing columns in {args.input}: {', '.join(absent)}")

        rows = []
        for n, row in enumerate(reader):
            pid = int(row[args.point_id]) if args.point_id else n
            x = float(row[args.x]) * args.scale + args.offset_x
            y = float(row[args.y]) * args.scale + args.offset_y
            if args.channel:
                channel = str(int(float(row[args.channel])))
            elif args.fixed_channel is not None:
                channel = str(args.fixed_channel)
            else:
                channel = ""
            for col, anchor_id in mapping:
                cell = row[col].strip()
                if cell == "" or cell == args.missing:
                    continue
                rows.append([pid, repr(x), repr(y), anchor_id, repr(float(cell)), channel, args.technology])

    with open(args.output, "w", newline="", encoding="utf-8") as fout:
        w = csv.writer(fout, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(rows)
    print(f"wrote {len(rows)} records to {args.output}")


if __name__ == "__main__":
    main(sys.argv[1:])
