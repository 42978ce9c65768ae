import json
import random
import string
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest
import requests

from urldetect.classifier import Hyperparams, init_params
from urldetect.corpus import default_vocabulary
from urldetect.server import PredictionService, make_server


def random_url(rng):
    host = "".join(rng.choices(string.ascii_lowercase + string.digits, k=rng.randint(3, 20)))
    path = "".join(rng.choices(string.ascii_letters + string.digits + "/-_.?=&%", k=rng.randint(0, 40)))
    tld = rng.choice(["com", "org", "ru", "xyz", "net"])
    return f"http://{host}.{tld}/{path}"


@pytest.fixture(scope="module")
def model():
    hp = Hyperparams(embed_dim=8, hidden_dim=8, max_len=60, dropout_rate=0.0, seed=5)
    return init_params(hp), hp, default_vocabulary()


def start_server(service, static_dir=None):
    httpd = make_server(service, "127.0.0.1", 0, static_dir)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    return httpd, f"http://127.0.0.1:{httpd.server_address[1]}"


@pytest.fixture(scope="module")
def live(model):
    params, hp, vocab = model
    httpd, base = start_server(PredictionService(params, hp, vocab))
    yield base, PredictionService(params, hp, vocab)
    httpd.shutdown()
    httpd.server_close()


class TestPredictEndpoint:
    def test_form_body(self, live):
        base, service = live
        resp = requests.post(f"{base}/predict", data={"url": "http://example.com"})
        assert resp.status_code == 200
        assert resp.headers["Content-Type"].startswith("application/json")
        doc = resp.json()
        assert set(doc) == {"prediction", "confidence", "probabilities"}
        assert doc == service.predict_one("http://example.com")

    def test_json_body(self, live):
        base, service = live
        resp = requests.post(f"{base}/predict", json={"url": "http://example.com/a"})
        assert resp.status_code == 200
        assert resp.json() == service.predict_one("http://example.com/a")

    def test_response_contract(self, live):
        base, _ = live
        doc = requests.post(f"{base}/predict", json={"url": "http://x.org"}).json()
        assert doc["prediction"] in {"benign", "phishing", "defacement", "malware"}
        probs = doc["probabilities"]
        assert set(probs) == {"benign", "phishing", "defacement", "malware"}
        assert abs(sum(probs.values()) - 1.0) < 1e-6
        assert doc["confidence"] == max(probs.values())

    def test_missing_url_field(self, live):
        base, _ = live
        resp = requests.post(f"{base}/predict", data={"other": "x"})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_empty_url(self, live):
        base, _ = live
        for body in ({"url": ""}, {"url": "   "}):
            resp = requests.post(f"{base}/predict", json=body)
            assert resp.status_code == 400

    def test_unparseable_json(self, live):
        base, _ = live
        resp = requests.post(
            f"{base}/predict", data="{oops", headers={"Content-Type": "application/json"}
        )
        assert resp.status_code == 400

    def test_non_string_url(self, live):
        base, _ = live
        resp = requests.post(f"{base}/predict", json={"url": 17})
        assert resp.status_code == 400

    def test_matches_in_process_predict(self, live):
        base, service = live
        rng = random.Random(0)
        for _ in range(30):
            url = random_url(rng)
            doc = requests.post(f"{base}/predict", json={"url": url}).json()
            expected = service.predict_one(url)
            assert doc["prediction"] == expected["prediction"]
            assert abs(doc["confidence"] - expected["confidence"]) < 1e-9
            for name, p in expected["probabilities"].items():
                assert abs(doc["probabilities"][name] - p) < 1e-9


class TestBatchEndpoint:
    def test_order_preserved(self, live):
        base, service = live
        urls = ["http://a.com", "http://b.com"]
        resp = requests.post(f"{base}/predict-batch", json={"urls": urls})
        assert resp.status_code == 200
        results = resp.json()["results"]
        assert len(results) == 2
        for url, item in zip(urls, results):
            assert item == service.predict_one(url)

    def test_inline_error_for_bad_item(self, live):
        base, _ = live
        resp = requests.post(
            f"{base}/predict-batch", json={"urls": ["http://a.com", "", "http://b.com"]}
        )
        results = resp.json()["results"]
        assert "prediction" in results[0]
        assert "error" in results[1]
        assert "prediction" in results[2]

    def test_item_equivalent_to_single(self, live):
        base, _ = live
        rng = random.Random(1)
        urls = [random_url(rng) for _ in range(10)]
        batch = requests.post(f"{base}/predict-batch", json={"urls": urls}).json()["results"]
        for url, item in zip(urls, batch):
            single = requests.post(f"{base}/predict", json={"url": url}).json()
            assert item == single

    def test_empty_list_rejected(self, live):
        base, _ = live
        assert requests.post(f"{base}/predict-batch", json={"urls": []}).status_code == 400

    def test_oversized_batch_rejected(self, live):
        base, _ = live
        urls = ["http://a.com"] * 1001
        assert requests.post(f"{base}/predict-batch", json={"urls": urls}).status_code == 400

    def test_bad_body_rejected(self, live):
        base, _ = live
        assert requests.post(f"{base}/predict-batch", json={"nope": 1}).status_code == 400


class TestHealthAndRoutes:
    def test_health(self, live):
        base, _ = live
        doc = requests.get(f"{base}/health").json()
        assert doc == {"status": "ok", "model_loaded": True}
        assert requests.get(f"{base}/health").json() == doc

    def test_unknown_route(self, live):
        base, _ = live
        assert requests.get(f"{base}/nope").status_code == 404
        assert requests.post(f"{base}/nope").status_code == 404

    def test_without_model(self):
        httpd, base = start_server(PredictionService())
        try:
            doc = requests.get(f"{base}/health").json()
            assert doc == {"status": "ok", "model_loaded": False}
            resp = requests.post(f"{base}/predict", json={"url": "http://a.com"})
            assert resp.status_code == 503
            resp = requests.post(f"{base}/predict-batch", json={"urls": ["http://a.com"]})
            assert resp.status_code == 503
        finally:
            httpd.shutdown()
            httpd.server_close()


class TestStaticServing:
    def test_serves_bundle(self, model, tmp_path):
        (tmp_path / "index.html").write_text("<html><body>scanner</body></html>")
        (tmp_path / "main.js").write_text("console.log('hi')")
        params, hp, vocab = model
        httpd, base = start_server(PredictionService(params, hp, vocab), str(tmp_path))
        try:
            root = requests.get(f"{base}/")
            assert root.status_code == 200
            assert "scanner" in root.text
            assert root.headers["Content-Type"].startswith("text/html")
            js = requests.get(f"{base}/main.js")
            assert js.status_code == 200
            assert js.headers["Content-Type"].startswith("text/javascript")
            assert requests.get(f"{base}/missing.css").status_code == 404
            assert requests.get(f"{base}/../etc/passwd").status_code == 404
            # API still works alongside the static bundle
            assert requests.get(f"{base}/health").status_code == 200
        finally:
            httpd.shutdown()
            httpd.server_close()


class TestConcurrency:
    def test_interleaved_requests_match_serial(self, live):
        base, service = live
        rng = random.Random(2)
        urls = [random_url(rng) for _ in range(24)]
        expected = [service.predict_one(u) for u in urls]

        def call(url):
            return requests.post(f"{base}/predict", json={"url": url}).json()

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(call, urls))
        assert results == expected
