#!/usr/bin/env python3
# Copyright 2026 The lfqa Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Independent brute-force reference for the toy fixture.

Recomputes candidate pools, silver selections, training pairs, the lexical
re-ranking and the metrics report directly from the definitions, without
indexes or caches, and writes files in the same canonical layout as the
lfqa tool so the two can be compared byte for byte.

    oracle.py --config tests/fixtures/toy/config.json \
              --stopwords core/data/stopwords_en.txt --out /tmp/golden
"""

import argparse
import hashlib
import json
import math
from pathlib import Path

TOKENIZER_VERSION = 1


# --------------------------------------------------------------------------
# text

def tokenize(text):
    tokens, cur = [], []
    for ch in text:
        if ch.isalnum():
            cur.append(ch.lower())
        elif cur:
            tokens.append("".join(cur))
            cur = []
    if cur:
        tokens.append("".join(cur))
    return tokens


def load_stopwords(path):
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return words


def stopword_hash(words):
    return hashlib.sha256("".join(w + "\n" for w in sorted(words)).encode()).hexdigest()


def content(tokens, stop):
    return {t for t in tokens if t not in stop}


def contains(seq, sub):
    n = len(sub)
    return any(seq[i:i + n] == sub for i in range(len(seq) - n + 1))


def lcs(a, b):
    table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[len(a)][len(b)]


def rouge_f1(cand, ref):
    if not cand or not ref:
        return 0.0
    m = lcs(cand, ref)
    if m == 0:
        return 0.0
    p = m / len(cand)
    r = m / len(ref)
    return 2.0 * p * r / (p + r)


def f1_tokens(text):
    return [t for t in tokenize(text) if t not in ("a", "an", "the")]


def token_f1(pred, gold):
    p, g = f1_tokens(pred), f1_tokens(gold)
    if not p and not g:
        return 1.0
    if not p or not g:
        return 0.0
    remaining = list(g)
    common = 0
    for t in p:
        if t in remaining:
            remaining.remove(t)
            common += 1
    if common == 0:
        return 0.0
    precision = common / len(p)
    recall = common / len(g)
    return 2.0 * precision * recall / (precision + recall)


def mean(values):
    total = 0.0
    for v in values:
        total += v
    return total / len(values)


def dump(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sample_key(seed, qid, pid):
    digest = hashlib.sha256(f"{seed}\x1f{qid}\x1f{pid}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


# --------------------------------------------------------------------------
# pipeline stages

def bm25_pools(corpus, dataset, stop, pool_size, k1, b):
    docs = {p["id"]: [t for t in tokenize(p["text"]) if t not in stop] for p in corpus}
    n = len(docs)
    avgdl = sum(len(d) for d in docs.values()) / n
    pools = {}
    for q in dataset:
        terms = sorted(set(t for t in tokenize(q["question"]) if t not in stop))
        scored = []
        for pid, toks in docs.items():
            score = 0.0
            matched = False
            for t in terms:
                tf = toks.count(t)
                if tf == 0:
                    continue
                matched = True
                df = sum(1 for d in docs.values() if t in d)
                idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
                norm = k1 * (1.0 - b + b * (len(toks) / avgdl))
                score += idf * ((tf * (k1 + 1.0)) / (tf + norm))
            if matched:
                scored.append((pid, score))
        scored.sort(key=lambda x: (-x[1], x[0]))
        pools[q["id"]] = scored[:pool_size]
    return pools


def select_silver(qa, pool, passages, stop, k, n_neg, seed):
    lfa = content(tokenize(qa["long_form_answers"][0]), stop)
    score = {pid: len(content(tokenize(passages[pid]["text"]), stop) & lfa) / len(lfa)
             for pid, _ in pool}
    rank = {pid: i + 1 for i, (pid, _) in enumerate(pool)}

    def key(pid):
        return (-score[pid], rank[pid], pid)

    text_tokens = {pid: tokenize(passages[pid]["text"]) for pid, _ in pool}
    forced = []
    for da in qa["direct_answers"]:
        toks = tokenize(da)
        if not toks:
            continue
        holders = [pid for pid, _ in pool if contains(text_tokens[pid], toks)]
        if holders:
            best = min(holders, key=key)
            if best not in forced:
                forced.append(best)
    forced = sorted(forced, key=key)[:k]
    positives = list(forced)
    for pid in sorted((pid for pid, _ in pool), key=key):
        if len(positives) >= k:
            break
        if pid not in positives:
            positives.append(pid)
    positives.sort(key=key)

    coverage = {}
    for da in qa["direct_answers"]:
        toks = tokenize(da)
        hit = None
        if toks:
            hit = next((pid for pid in positives if contains(text_tokens[pid], toks)), None)
        coverage.setdefault(da, hit)
    rest = [pid for pid, _ in pool if pid not in positives]
    negatives = sorted(rest, key=lambda pid: (sample_key(seed, qa["id"], pid), pid))[:n_neg]
    return {"question_id": qa["id"], "positives": positives, "negatives": negatives,
            "da_coverage": coverage, "strategy": "lexical_recall", "seed": seed,
            "scores": score}


def lexical_rerank(qa, pool, passages, stop, k):
    q = content(tokenize(qa["question"]), stop)
    scored = []
    for pid, _ in pool:
        s = len(content(tokenize(passages[pid]["text"]), stop) & q) / len(q) if q else 0.0
        scored.append((pid, s))
    scored.sort(key=lambda x: -x[1])  # stable: ties keep pool order
    return scored[:k]


# --------------------------------------------------------------------------
# metrics

def dedupe_answers(strings):
    out = []
    for s in strings:
        toks = tokenize(s)
        if toks and toks not in out:
            out.append(toks)
    return out


def contained_fraction(answers, retrieved_tokens):
    hits = sum(1 for a in answers if any(contains(p, a) for p in retrieved_tokens))
    return hits, len(answers)


def evaluate(dataset, run, passages, stop, k, answers, extractions, conv_extractions):
    by_answer = {}
    for a in answers:
        by_answer.setdefault(a["question_id"], a)
    rows = []
    for qa in dataset:
        if qa["id"] not in run:
            continue
        ids = [pid for pid, _ in run[qa["id"]][:k]]
        known = [pid for pid in ids if pid in passages]
        toks = [tokenize(passages[pid]["text"]) for pid in known]
        row = {"question_id": qa["id"]}

        das = dedupe_answers(qa["direct_answers"])
        if das:
            h, t = contained_fraction(das, toks)
            row["da_recall"] = h / t
        gold = set(qa["gold_page_ids"])
        if gold:
            found = {passages[pid]["page_id"] for pid in known} & gold
            row["wikipage_recall"] = len(found) / len(gold)
        union = dedupe_answers([a for f in qa["followups"] for a in f["answers"]])
        if union:
            h, t = contained_fraction(union, toks)
            row["followup_recall"] = h / t
            per_turn = []
            for f in qa["followups"]:
                ans = dedupe_answers(f["answers"])
                if ans:
                    h, t = contained_fraction(ans, toks)
                    per_turn.append({"turn_index": f["turn_index"], "recall": h / t})
            row["per_turn"] = per_turn
        if qa["id"] in by_answer:
            text = by_answer[qa["id"]]["text"]
            vocab = set()
            for pt in toks:
                vocab |= content(pt, stop)
            occ = [t for t in tokenize(text) if t not in stop]
            if occ:
                row["groundedness"] = sum(1 for t in occ if t in vocab) / len(occ)
                row["groundedness_degenerate"] = False
            else:
                row["groundedness"] = 1.0
                row["groundedness_degenerate"] = True
            if qa["long_form_answers"]:
                cand = tokenize(text)
                row["rouge_l"] = max(rouge_f1(cand, tokenize(r)) for r in qa["long_form_answers"])
        for name, records in (("d_f1", extractions), ("c_f1", conv_extractions)):
            mine = [e for e in records if e["question_id"] == qa["id"]]
            scores = [max(token_f1(e["extracted_span"], g) for g in e["gold_answers"])
                      for e in mine if e["gold_answers"]]
            if scores:
                row[name] = mean(scores)
        rows.append(row)
    return rows


def aggregate(rows, config_echo):
    summary = {}
    for name, scale in (("da_recall", 1.0), ("wikipage_recall", 1.0), ("followup_recall", 1.0),
                        ("groundedness", 1.0), ("rouge_l", 100.0), ("d_f1", 100.0),
                        ("c_f1", 100.0)):
        values = [r[name] for r in rows if name in r]
        summary[name] = {"mean": mean(values) * scale if values else None, "n": len(values)}
    r, d = summary["rouge_l"]["mean"], summary["d_f1"]["mean"]
    dr = math.sqrt(r * d) if r is not None and d is not None else None
    turns = {}
    for row in rows:
        for t in row.get("per_turn", []):
            turns.setdefault(t["turn_index"], []).append(t["recall"])
    per_turn = [{"turn_index": t, "mean_recall": mean(v), "n": len(v)}
                for t, v in sorted(turns.items())]
    return {"config": config_echo, "questions": len(rows), "excluded_questions": [],
            "summary": summary, "dr": dr, "per_turn": per_turn, "per_question": rows}


def render_table(report):
    lines = [f"k={report['config']['k']} questions={report['questions']} "
             f"excluded={len(report['excluded_questions'])}",
             "%-18s %10s %6s" % ("metric", "value", "n")]
    for name in ("da_recall", "wikipage_recall", "followup_recall", "groundedness", "rouge_l",
                 "d_f1", "c_f1"):
        s = report["summary"][name]
        decimals = 1 if name in ("rouge_l", "d_f1", "c_f1") else 3
        value = "n/a" if s["mean"] is None else "%.*f" % (decimals, s["mean"])
        lines.append("%-18s %10s %6d" % (name, value, s["n"]))
    dr = "n/a" if report["dr"] is None else "%.1f" % report["dr"]
    lines.append("%-18s %10s %6s" % ("dr", dr, "-"))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------

def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", required=True)
    ap.add_argument("--stopwords", required=True)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    cfg_path = Path(args.config)
    cfg = json.loads(cfg_path.read_text(encoding="utf-8"))
    base = cfg_path.parent
    paths = {k: base / v for k, v in cfg["paths"].items()}
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    stop = load_stopwords(args.stopwords)
    corpus = read_jsonl(paths["corpus"])
    passages = {p["id"]: p for p in corpus}
    dataset = read_jsonl(paths["dataset"])
    seed = cfg["seed"]
    ret, sil, rr = cfg["retrieval"], cfg["silver"], cfg["rerank"]
    assert sil["strategy"] == "lexical_recall" and sil["mode"] == "silver"
    assert sil["lfa_policy"] == "first" and rr["scorer"] == "lexical"

    pools = bm25_pools(corpus, dataset, stop, ret["pool_size"], ret["k1"], ret["b"])
    with open(out / "pools.jsonl", "w", encoding="utf-8") as fh:
        for qa in dataset:
            for i, (pid, s) in enumerate(pools[qa["id"]]):
                fh.write(dump({"question_id": qa["id"], "passage_id": pid, "rank": i + 1,
                               "score": s}) + "\n")

    selections = [select_silver(qa, pools[qa["id"]], passages, stop, sil["k"],
                                sil["negatives"], seed) for qa in dataset]
    with open(out / "silver.jsonl", "w", encoding="utf-8") as fh:
        for s in selections:
            fh.write(dump(s) + "\n")
    with open(out / "training_pairs.jsonl", "w", encoding="utf-8") as fh:
        for qa, s in zip(dataset, selections):
            labelled = [(pid, 1) for pid in s["positives"][:sil["positives"]]]
            labelled += [(pid, 0) for pid in s["negatives"][:sil["negatives"]]]
            for pid, label in labelled:
                p = passages[pid]
                fh.write(dump({"question": qa["question"], "passage_title": p["title"],
                               "passage_text": p["text"], "label": label}) + "\n")

    reranked = {qa["id"]: lexical_rerank(qa, pools[qa["id"]], passages, stop, rr["k"])
                for qa in dataset}
    with open(out / "rerank.jsonl", "w", encoding="utf-8") as fh:
        for qa in dataset:
            for i, (pid, s) in enumerate(reranked[qa["id"]]):
                fh.write(dump({"question_id": qa["id"], "passage_id": pid, "rank": i + 1,
                               "score": s}) + "\n")

    rows = evaluate(dataset, reranked, passages, stop, cfg["eval"]["k"],
                    read_jsonl(paths["answers"]), read_jsonl(paths["extractions"]),
                    read_jsonl(paths["conv_extractions"]))
    echo = {"k": cfg["eval"]["k"], "stopword_hash": stopword_hash(stop),
            "tokenizer_version": TOKENIZER_VERSION, "seed": seed, "run": "rerank.jsonl"}
    report = aggregate(rows, echo)
    (out / "report.json").write_text(dump(report) + "\n", encoding="utf-8")
    (out / "report.txt").write_text(render_table(report), encoding="utf-8")
    csv = "turn_index,mean_recall,n\n" + "".join(
        f"{t['turn_index']},{t['mean_recall']!r},{t['n']}\n" for t in report["per_turn"])
    (out / "report.per_turn.csv").write_text(csv, encoding="utf-8")


if __name__ == "__main__":
    main()
