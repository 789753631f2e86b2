"""Thin command-line client for the beamforming service.

Every subcommand builds a JSON request and sends it through the HTTP API:
against a remote server when --server is given, otherwise against the ASGI
app in-process. The client only reads input files, posts requests, and writes
response payloads, so local and remote runs produce identical bytes.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

import argparse
import asyncio
import base64
import sys

import httpx

from .errors import DataError, PabeamError, UsageError
from .service import create_app


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; usage errors must be code 1.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str) -> bytes:
    return base64.b64decode(text.encode("ascii"))


def _read_file(path, what):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {what} '{path}': {e}") from e


def _write_file(path, data: bytes):
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as e:
        raise UsageError(f"cannot write '{path}': {e}") from e


def _request(server, path, payload):
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            response = client.post(path, json=payload)
    else:
        async def _call():
            transport = httpx.ASGITransport(app=create_app())
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://pabeam.local",
                                         timeout=None) as client:
                return await client.post(path, json=payload)
        response = asyncio.run(_call())
    if response.status_code != 200:
        try:
            body = response.json()
            message, kind = body["error"], body.get("kind", "data")
        except Exception:
            message, kind = response.text, "data"
        raise (UsageError if kind == "usage" else DataError)(message)
    return response.json()


def _parse_roi(text):
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError(f"ROI '{text}' must be x0,z0,x1,z1 in meters")
    try:
        x0, z0, x1, z1 = (float(p) for p in parts)
    except ValueError as e:
        raise UsageError(f"ROI '{text}' has a non-numeric field") from e
    return {"x_lo": min(x0, x1), "x_hi": max(x0, x1),
            "z_lo": min(z0, z1), "z_hi": max(z0, z1)}


def _parse_float_list(text, flag):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"{flag} expects a comma-separated number list") from e


def _parse_int_list(text, flag):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"{flag} expects a comma-separated integer list") from e


def _config_text(args):
    return _read_file(args.config, "config").decode("utf-8")


def _beamform_overrides(args, payload):
    if args.method is not None:
        payload["method"] = args.method
    if args.p is not None:
        payload["p"] = args.p
    if args.no_filter:
        payload["apply_filter"] = False
    if args.filter is not None:
        lo_hi = _parse_float_list(args.filter, "--filter")
        if len(lo_hi) != 2:
            raise UsageError("--filter expects LO_HZ,HI_HZ")
        payload["filter_lo_hz"], payload["filter_hi_hz"] = lo_hi
    if args.dynamic_range is not None:
        payload["dynamic_range_db"] = args.dynamic_range


def _cmd_simulate(args):
    payload = {"config_text": _config_text(args)}
    if args.seed is not None:
        payload["seed"] = args.seed
    body = _request(args.server, "/v1/simulate", payload)
    _write_file(args.out, _unb64(body["frame_b64"]))
    print(f"wrote {args.out}")
    print(f"sha256 {body['sha256']}")
    print(f"elements {body['num_elements']}  samples {body['num_samples']}  "
          f"fs_hz {body['sampling_freq_hz']:g}  c_mps {body['sound_speed_mps']:g}")
    if body["truncated_targets"]:
        print(f"warning: targets truncated by the trace length: "
              f"{body['truncated_targets']}")
    return 0


def _cmd_beamform(args):
    payload = {"config_text": _config_text(args),
               "frame_b64": _b64(_read_file(args.infile, "frame"))}
    _beamform_overrides(args, payload)
    body = _request(args.server, "/v1/beamform", payload)
    prefix = args.out
    written = []
    for stage, key in (("raw", "raw_b64"), ("filtered", "filtered_b64"),
                       ("envelope", "envelope_b64"), ("log", "log_b64")):
        if body.get(key):
            path = f"{prefix}_{stage}.paim"
            _write_file(path, _unb64(body[key]))
            written.append(path)
    pgm_path = f"{prefix}.pgm"
    _write_file(pgm_path, _unb64(body["pgm_b64"]))
    written.append(pgm_path)
    label = body["method"] if body["p"] is None else f"{body['method']} p={body['p']}"
    print(f"beamformed {body['nx']}x{body['nz']} image with {label}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _metrics_roi_args(args, payload):
    if args.target_roi:
        payload["target_rois"] = [_parse_roi(r) for r in args.target_roi]
    if args.noise_roi is not None:
        payload["noise_roi"] = _parse_roi(args.noise_roi)
    if args.depths is not None:
        payload["depths_m"] = _parse_float_list(args.depths, "--depths")


def _profile_filename(out, depth_m):
    stem = out[:-4] if out.endswith(".csv") else out
    return f"{stem}_profile_{depth_m * 1e3:.2f}mm.csv"


def _cmd_metrics(args):
    payload = {
        "config_text": _config_text(args),
        "envelope_b64": _b64(_read_file(f"{args.infile}_envelope.paim", "envelope image")),
        "log_b64": _b64(_read_file(f"{args.infile}_log.paim", "log image")),
    }
    if args.method is not None:
        payload["method"] = args.method
    if args.p is not None:
        payload["p"] = args.p
    _metrics_roi_args(args, payload)
    body = _request(args.server, "/v1/metrics", payload)
    _write_file(args.out, body["metrics_csv"].encode("utf-8"))
    print(f"wrote {args.out}")
    for prof in body["profiles"]:
        path = _profile_filename(args.out, prof["depth_m"])
        _write_file(path, prof["csv"].encode("utf-8"))
        print(f"wrote {path}")
    return 0


def _cmd_sweep_p(args):
    payload = {"config_text": _config_text(args),
               "p_list": _parse_int_list(args.p, "--p")}
    if args.infile is not None:
        payload["frame_b64"] = _b64(_read_file(args.infile, "frame"))
    if args.seed is not None:
        payload["seed"] = args.seed
    _metrics_roi_args(args, payload)
    body = _request(args.server, "/v1/sweep", payload)
    prefix = args.out
    for item in body["items"]:
        for suffix, key in (("envelope.paim", "envelope_b64"), ("log.paim", "log_b64"),
                            ("render.pgm", "pgm_b64")):
            path = f"{prefix}_p{item['p']}_{suffix}"
            _write_file(path, _unb64(item[key]))
        print(f"wrote images for p={item['p']}")
    csv_path = f"{prefix}_metrics.csv"
    _write_file(csv_path, body["metrics_csv"].encode("utf-8"))
    print(f"wrote {csv_path}")
    return 0


def _cmd_bench(args):
    payload = {"repeats": args.repeats, "seed": args.seed or 0,
               "parallel": args.parallel}
    if args.elements is not None:
        payload["element_counts"] = _parse_int_list(args.elements, "--elements")
    if args.methods is not None:
        payload["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    body = _request(args.server, "/v1/bench", payload)
    if args.out:
        _write_file(args.out, body["csv"].encode("utf-8"))
        print(f"wrote {args.out}")
    mode = "parallel" if args.parallel else "single-threaded"
    print(f"timing mode: {mode}")
    for row in body["results"]:
        label = row["method"] if row["p"] is None else f"{row['method']}(p={row['p']})"
        print(f"{label:>12}  M={row['num_elements']:<4d} "
              f"median {row['median_seconds']:.6f} s  "
              f"ops/pixel {row['ops_per_pixel']}")
    return 0


def _cmd_serve(args):
    import uvicorn
    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="pabeam",
                     description="Photoacoustic beamforming toolkit (service client)")
    parser.add_argument("--server", default=None,
                        help="base URL of a running pabeam service; default runs in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic RF frame (PARF)")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_bf = sub.add_parser("beamform", help="reconstruct images from a PARF frame")
    p_bf.add_argument("--config", required=True)
    p_bf.add_argument("--in", dest="infile", required=True)
    p_bf.add_argument("--out", required=True, help="output path prefix")
    p_bf.add_argument("--method", choices=["das", "dmas", "nl"], default=None)
    p_bf.add_argument("--p", type=int, default=None)
    p_bf.add_argument("--filter", default=None, metavar="LO_HZ,HI_HZ")
    p_bf.add_argument("--no-filter", action="store_true")
    p_bf.add_argument("--dynamic-range", type=float, default=None, metavar="DB")
    p_bf.set_defaults(func=_cmd_beamform)

    p_met = sub.add_parser("metrics", help="SNR/FWHM/sidelobe tables from PAIM images")
    p_met.add_argument("--config", required=True)
    p_met.add_argument("--in", dest="infile", required=True,
                       help="prefix used by beamform (expects _envelope.paim and _log.paim)")
    p_met.add_argument("--out", required=True, help="metrics CSV path")
    p_met.add_argument("--method", default=None, help="label for the CSV rows")
    p_met.add_argument("--p", type=int, default=None)
    p_met.add_argument("--target-roi", action="append", default=None,
                       metavar="x0,z0,x1,z1")
    p_met.add_argument("--noise-roi", default=None, metavar="x0,z0,x1,z1")
    p_met.add_argument("--depths", default=None, help="comma list of depths in meters")
    p_met.set_defaults(func=_cmd_metrics)

    p_swp = sub.add_parser("sweep-p", help="beamform once per p and tabulate metrics")
    p_swp.add_argument("--config", required=True)
    p_swp.add_argument("--in", dest="infile", default=None,
                       help="optional PARF frame; simulated from config when omitted")
    p_swp.add_argument("--out", required=True, help="output path prefix")
    p_swp.add_argument("--p", required=True, help="comma list of roots, e.g. 2,3,4,5")
    p_swp.add_argument("--seed", type=int, default=None)
    p_swp.add_argument("--target-roi", action="append", default=None,
                       metavar="x0,z0,x1,z1")
    p_swp.add_argument("--noise-roi", default=None, metavar="x0,z0,x1,z1")
    p_swp.add_argument("--depths", default=None)
    p_swp.set_defaults(func=_cmd_sweep_p)

    p_bench = sub.add_parser("bench", help="time beamformers across element counts")
    p_bench.add_argument("--elements", default=None, help="comma list, default 16,32,64,128")
    p_bench.add_argument("--methods", default=None,
                         help="comma list of das, dmas, nl:<p>; default das,dmas,nl:5")
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--parallel", action="store_true",
                         help="time the multi-threaded kernels instead")
    p_bench.add_argument("--out", default=None, help="bench CSV path")
    p_bench.set_defaults(func=_cmd_bench)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except PabeamError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
