"""Remote-model benchmark runner.

Speaks the common chat-completions JSON shape over HTTP, extracts the
JSON "answer" field from model output (tolerating code fences and
surrounding prose), and records one prediction line per problem in dataset
order. Failures become unparseable predictions rather than aborting the
run; the API key comes from a named environment variable only.
"""

from __future__ import annotations

import json
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)
_OBJECT = re.compile(r"\{[^{}]*\}", re.DOTALL)
_ANSWER_FIELD = re.compile(r'"answer"\s*:\s*("(?:[^"\\]|\\.)*"|[^,}\s]+)')


@dataclass
class BenchConfig:
    endpoint: str
    model: str
    api_key_env: str = "NUMTOK_API_KEY"
    concurrency: int = 4
    max_retries: int = 3
    timeout: float = 60.0
    temperature: float = 0.0


def extract_answer(text: str) -> str | None:
    """The "answer" value from model output; None when nothing parses."""
    candidates = _FENCE.findall(text)
    candidates.append(text)
    for chunk in candidates:
        for blob in _OBJECT.findall(chunk):
            try:
                obj = json.loads(blob)
            except json.JSONDecodeError:
                continue
            if isinstance(obj, dict) and "answer" in obj:
                ans = obj["answer"]
                if isinstance(ans, list):
                    return json.dumps(ans)
                return ans if isinstance(ans, str) else json.dumps(ans)
    m = _ANSWER_FIELD.search(text)
    if m:
        raw = m.group(1)
        if raw.startswith('"'):
            try:
                return json.loads(raw)
            except json.JSONDecodeError:
                return raw.strip('"')
        return raw
    return None


def _post_with_retries(cfg: BenchConfig, payload: dict, headers: dict) -> dict:
    delay = 1.0
    last: Exception | None = None
    for attempt in range(cfg.max_retries + 1):
        try:
            resp = requests.post(cfg.endpoint, json=payload, headers=headers, timeout=cfg.timeout)
            resp.raise_for_status()
            return resp.json()
        except (requests.RequestException, ValueError) as e:
            last = e
            if attempt < cfg.max_retries:
                time.sleep(delay)
                delay *= 2.0
    raise RuntimeError(f"request failed after {cfg.max_retries + 1} attempts: {last}")


def query_one(cfg: BenchConfig, system: str, user: str, headers: dict) -> dict:
    payload = {
        "model": cfg.model,
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ],
        "temperature": cfg.temperature,
    }
    body = _post_with_retries(cfg, payload, headers)
    content = body["choices"][0]["message"]["content"]
    usage = body.get("usage", {})
    return {"content": content, "usage": usage}


def run_bench(cfg: BenchConfig, problems: list) -> list[dict]:
    """One prediction record per problem, in dataset order."""
    key = os.environ.get(cfg.api_key_env, "")
    headers = {"Content-Type": "application/json"}
    if key:
        headers["Authorization"] = f"Bearer {key}"

    def work(item):
        idx, problem = item
        try:
            out = query_one(cfg, problem.system_prompt, problem.question, headers)
            answer = extract_answer(out["content"])
            return {
                "index": idx,
                "task": problem.task,
                "answer": answer if answer is not None else "",
                "raw": out["content"],
                "usage": out["usage"],
                "error": None if answer is not None else "unparseable",
            }
        except Exception as e:  # recorded per item, never fatal
            return {
                "index": idx,
                "task": problem.task,
                "answer": "",
                "raw": "",
                "usage": {},
                "error": str(e),
            }

    with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
        records = list(pool.map(work, enumerate(problems)))
    records.sort(key=lambda r: r["index"])
    return records
