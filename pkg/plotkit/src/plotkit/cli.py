import argparse
import sys

from .render import KINDS, FigureSpec, ValidationError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit", description="Render result CSVs into figures.")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render one figure")
    rend.add_argument("--kind", required=True, choices=KINDS)
    rend.add_argument("--in", dest="inputs", required=True, action="append",
                      help="input CSV (repeatable)")
    rend.add_argument("--out", required=True, help="output image path")
    rend.add_argument("--xlabel", default="")
    rend.add_argument("--ylabel", default="")
    rend.add_argument("--title", default="")
    rend.add_argument("--log-y", action="store_true", default=None)
    args = parser.parse_args(argv)

    spec = FigureSpec(inputs=tuple(args.inputs), kind=args.kind,
                      out_path=args.out, xlabel=args.xlabel,
                      ylabel=args.ylabel, log_y=args.log_y, title=args.title)
    try:
        render(spec)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
