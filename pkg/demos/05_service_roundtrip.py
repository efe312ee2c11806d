"""Full service roundtrip against a live HTTP server: upload a dataset,
generate a story, edit one fact, re-order, render and share.

Starts uvicorn on a local port in a background thread and talks to it with
plain urllib, so the demo needs no extra client dependencies.
"""
import json
import tempfile
import threading
import time
import urllib.request
from pathlib import Path

import uvicorn

from factweaver.service import create_app

DATA = Path(__file__).parent / "data" / "car_sales.csv"
PORT = 8731


def call(method, path, payload=None, raw=None):
    url = f"http://127.0.0.1:{PORT}{path}"
    data = raw if raw is not None else (json.dumps(payload).encode() if payload else None)
    request = urllib.request.Request(url, data=data, method=method)
    if payload is not None:
        request.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(request) as response:
        body = response.read()
    try:
        return json.loads(body)
    except json.JSONDecodeError:
        return body.decode()


def main():
    data_dir = tempfile.mkdtemp(prefix="factweaver-demo-")
    app = create_app(data_dir)
    config = uvicorn.Config(app, host="127.0.0.1", port=PORT, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.05)

    try:
        dataset = call("POST", "/datasets", raw=DATA.read_bytes())
        print(f"dataset {dataset['id']}: {dataset['row_count']} rows")

        story = call(
            "POST",
            f"/datasets/{dataset['id']}/stories",
            payload={
                "goal": {"max_length": 4, "iteration_budget": 80},
                "weights": [0.3, 0.4, 0.3],
                "chart_diversity": 0.5,
                "seed": 11,
            },
        )
        print(f"story {story['id']} reward={story['story']['criteria']['reward']:.4f}")
        for text in story["captions"]:
            print("  -", text)

        edited = call(
            "PATCH",
            f"/stories/{story['id']}",
            payload={
                "revision": story["revision"],
                "fact_index": 0,
                "fact": {
                    "type": "proportion",
                    "measure": [{"field": "Sales", "aggregate": "sum"}],
                    "subspace": [{"field": "Brand", "value": "Ford"}],
                    "breakdown": [{"field": "Category"}],
                    "focus": [{"field": "Category", "value": "SUV"}],
                },
            },
        )
        print(f"edited fact 0 -> revision {edited['revision']}: {edited['captions'][0]}")

        n = len(edited["story"]["facts"])
        reordered = call(
            "POST",
            f"/stories/{story['id']}/order",
            payload={"revision": edited["revision"], "order": list(range(n))[::-1]},
        )
        print("reversed order; relations now:", reordered["story"]["relations"])

        share = call("POST", f"/stories/{story['id']}/share", payload={"mode": "storyline"})
        print("share url:", share["url"])
        document = call("GET", share["url"])
        print(f"shared document: {len(document)} characters of HTML")
    finally:
        server.should_exit = True
        thread.join(timeout=5)


if __name__ == "__main__":
    main()
