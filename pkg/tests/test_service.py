import base64
import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from stemtrace import BinaryMask, __version__, read_mask_png, write_mask_png
from stemtrace.service import create_server

STEM = [[40.0, 10.0], [42.0, 40.0], [45.0, 80.0], [41.0, 110.0]]


@pytest.fixture(scope="module")
def server_url():
    server = create_server("127.0.0.1:0", allowed_origins=("http://ui.example",), max_body_bytes=256 * 1024)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}"
    server.shutdown()


def request(url, method="GET", body=None, headers=None):
    req = urllib.request.Request(url, data=body, method=method, headers=headers or {})
    try:
        with urllib.request.urlopen(req, timeout=10) as response:
            return response.status, dict(response.headers), response.read()
    except urllib.error.HTTPError as exc:
        return exc.code, dict(exc.headers), exc.read()


def post_json(url, doc, headers=None):
    body = json.dumps(doc).encode("utf-8")
    merged = {"Content-Type": "application/json"}
    merged.update(headers or {})
    return request(url, method="POST", body=body, headers=merged)


def mask_request(stems=None, **overrides):
    doc = {
        "image_width": 128,
        "image_height": 128,
        "stems": [STEM] if stems is None else stems,
        "tau": 7,
    }
    doc.update(overrides)
    return doc


class TestHealth:
    def test_healthz(self, server_url):
        status, _, body = request(f"{server_url}/healthz")
        assert status == 200
        assert body.decode() == f"ok {__version__}"

    def test_wrong_method(self, server_url):
        status, _, body = request(f"{server_url}/healthz", method="POST", body=b"{}")
        assert status == 405

    def test_unknown_path(self, server_url):
        status, _, _ = request(f"{server_url}/nope")
        assert status == 404

    def test_mask_requires_post(self, server_url):
        status, _, _ = request(f"{server_url}/v1/mask")
        assert status == 405


class TestMaskEndpoint:
    def test_returns_png_with_echo_headers(self, server_url):
        status, headers, body = post_json(f"{server_url}/v1/mask", mask_request())
        assert status == 200
        assert headers["Content-Type"] == "image/png"
        assert headers["X-Stemtrace-Tau"] == "7"
        assert int(headers["X-Stemtrace-Samples-Per-Segment"]) >= 32
        mask = read_mask_png(body)
        assert (mask.width, mask.height) == (128, 128)
        assert mask.count_set > 0

    def test_identical_requests_identical_bytes(self, server_url):
        _, _, first = post_json(f"{server_url}/v1/mask", mask_request())
        _, _, second = post_json(f"{server_url}/v1/mask", mask_request())
        assert first == second

    def test_collinear_request_passes_distance_oracle(self, server_url):
        import oracles
        from stemtrace import StemCurve

        stem = [[64.0, 10.0], [64.0, 40.0], [64.0, 70.0], [64.0, 100.0]]
        _, _, body = post_json(f"{server_url}/v1/mask", mask_request(stems=[stem], tau=7))
        mask = read_mask_png(body)
        dense = oracles.dense_curve_points(StemCurve(tuple((p[0], p[1]) for p in stem)))
        strays, holes = oracles.band_bound_violations(mask.pixels, dense, 7 // 2)
        assert strays == 0 and holes == 0

    def test_three_point_stem_rejected(self, server_url):
        status, _, body = post_json(f"{server_url}/v1/mask", mask_request(stems=[STEM[:3]]))
        assert status == 400
        doc = json.loads(body)
        assert doc["error"] == "insufficient_control_points"

    def test_no_stems_rejected(self, server_url):
        status, _, body = post_json(f"{server_url}/v1/mask", mask_request(stems=[]))
        assert status == 400
        assert json.loads(body)["error"] == "no_stems"

    def test_bad_tau_rejected(self, server_url):
        status, _, body = post_json(f"{server_url}/v1/mask", mask_request(tau=0))
        assert status == 400
        assert json.loads(body)["error"] == "invalid_tau"

    def test_malformed_json_rejected(self, server_url):
        status, _, body = request(
            f"{server_url}/v1/mask", method="POST", body=b"{nope",
            headers={"Content-Type": "application/json"},
        )
        assert status == 400
        assert json.loads(body)["error"] == "invalid_json"

    def test_non_finite_point_rejected(self, server_url):
        status, _, body = post_json(
            f"{server_url}/v1/mask",
            mask_request(stems=[[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [float("nan"), 3.0]]]),
        )
        assert status == 400
        assert json.loads(body)["error"] == "invalid_control_point"

    def test_far_out_of_range_point_rejected(self, server_url):
        status, _, body = post_json(
            f"{server_url}/v1/mask",
            mask_request(stems=[[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [99999.0, 3.0]]]),
        )
        assert status == 400
        assert json.loads(body)["error"] == "control_point_out_of_range"

    def test_oversized_body_rejected(self, server_url):
        padding = [[float(i % 128), float(i % 128)] for i in range(40000)]
        status, _, body = post_json(f"{server_url}/v1/mask", mask_request(stems=[padding]))
        assert status == 413
        assert json.loads(body)["error"] == "body_too_large"

    def test_clamped_mask_differs(self, server_url):
        _, _, plain = post_json(f"{server_url}/v1/mask", mask_request())
        _, _, clamped = post_json(f"{server_url}/v1/mask", mask_request(clamp_ends=True))
        assert plain != clamped


class TestEvaluateEndpoint:
    def b64(self, mask):
        return base64.b64encode(write_mask_png(mask)).decode("ascii")

    def test_identical_masks(self, server_url):
        arr = np.zeros((16, 16), dtype=bool)
        arr[2:9, 3:5] = True
        payload = self.b64(BinaryMask(arr))
        status, _, body = post_json(
            f"{server_url}/v1/evaluate", {"pred_png": payload, "gt_png": payload}
        )
        assert status == 200
        doc = json.loads(body)
        assert doc["precision"] == doc["recall"] == doc["f1_standard"] == 1.0
        assert doc["f1_paper"] == 0.5
        assert doc["fp"] == doc["fn"] == 0

    def test_disjoint_masks(self, server_url):
        a = np.zeros((8, 8), dtype=bool)
        a[0, 0] = True
        b = np.zeros((8, 8), dtype=bool)
        b[7, 7] = True
        status, _, body = post_json(
            f"{server_url}/v1/evaluate",
            {"pred_png": self.b64(BinaryMask(a)), "gt_png": self.b64(BinaryMask(b))},
        )
        doc = json.loads(body)
        assert doc["precision"] == doc["recall"] == doc["f1_standard"] == doc["f1_paper"] == 0.0

    def test_superset_case(self, server_url):
        gt = np.zeros((8, 8), dtype=bool)
        gt.flat[:10] = True
        pred = np.zeros((8, 8), dtype=bool)
        pred.flat[:20] = True
        status, _, body = post_json(
            f"{server_url}/v1/evaluate",
            {"pred_png": self.b64(BinaryMask(pred)), "gt_png": self.b64(BinaryMask(gt))},
        )
        doc = json.loads(body)
        assert doc["f1_standard"] == pytest.approx(2 / 3, abs=1e-12)
        assert doc["f1_paper"] == pytest.approx(1 / 3, abs=1e-12)

    def test_dimension_mismatch(self, server_url):
        status, _, body = post_json(
            f"{server_url}/v1/evaluate",
            {"pred_png": self.b64(BinaryMask.zeros(8, 8)), "gt_png": self.b64(BinaryMask.zeros(9, 9))},
        )
        assert status == 400
        assert json.loads(body)["error"] == "dimension_mismatch"

    def test_undecodable_mask(self, server_url):
        status, _, body = post_json(
            f"{server_url}/v1/evaluate",
            {"pred_png": base64.b64encode(b"not a png").decode(), "gt_png": self.b64(BinaryMask.zeros(4, 4))},
        )
        assert status == 400
        assert json.loads(body)["error"] == "undecodable_mask"

    def test_path_variant(self, server_url, tmp_path):
        arr = np.zeros((8, 8), dtype=bool)
        arr[1, 1] = True
        path = tmp_path / "m.png"
        path.write_bytes(write_mask_png(BinaryMask(arr)))
        status, _, body = post_json(
            f"{server_url}/v1/evaluate", {"pred_path": str(path), "gt_path": str(path)}
        )
        assert status == 200
        assert json.loads(body)["tp"] == 1


class TestCors:
    def test_allowed_origin_echoed(self, server_url):
        status, headers, _ = post_json(
            f"{server_url}/v1/mask", mask_request(), headers={"Origin": "http://ui.example"}
        )
        assert status == 200
        assert headers["Access-Control-Allow-Origin"] == "http://ui.example"

    def test_disallowed_origin_not_echoed(self, server_url):
        status, headers, _ = post_json(
            f"{server_url}/v1/mask", mask_request(), headers={"Origin": "http://evil.example"}
        )
        assert status == 200
        assert "Access-Control-Allow-Origin" not in headers

    def test_preflight(self, server_url):
        status, headers, _ = request(
            f"{server_url}/v1/mask", method="OPTIONS",
            headers={"Origin": "http://ui.example", "Access-Control-Request-Method": "POST"},
        )
        assert status == 204
        assert headers["Access-Control-Allow-Origin"] == "http://ui.example"
        assert "POST" in headers["Access-Control-Allow-Methods"]


class TestConcurrency:
    def test_parallel_identical_requests_agree(self, server_url):
        from concurrent.futures import ThreadPoolExecutor

        def go(_):
            return post_json(f"{server_url}/v1/mask", mask_request())

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(go, range(16)))
        assert all(status == 200 for status, _, _ in results)
        assert len({body for _, _, body in results}) == 1


class TestParityWithCli:
    def test_preview_and_http_agree(self, server_url, tmp_path):
        from stemtrace.cli import main
        from test_dataset_io import labelme_doc

        stem = [(40, 10), (42, 40), (45, 80), (41, 110)]
        ann_file = tmp_path / "plant.json"
        ann_file.write_text(labelme_doc([stem], width=128, height=128, tau=7))
        out_png = tmp_path / "cli.png"
        assert main(["preview", "--annotation", str(ann_file), "--out", str(out_png)]) == 0

        _, _, via_http = post_json(f"{server_url}/v1/mask", mask_request())
        assert out_png.read_bytes() == via_http
