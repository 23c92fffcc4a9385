"""Regenerate the synthetic evaluation fixture under tests/fixtures/.

Every hypothesis is derived from its reference by an explicit edit plan
(novel-token substitutions, whole-word deletions, novel-word insertions; a
deletion and an insertion never share an utterance). Under that plan the
minimum word and character edit costs are known in closed form, so the
expected counts written to expected.json come from the plan, not from the
scorer under test. Surface noise (casing, punctuation, curly apostrophes,
Ethiopic word spaces, Ge'ez homophone variants) is layered on top and must be
removed by evaluation normalization for the counts to hold.

    python scripts/make_fixture.py [--out tests/fixtures]
"""

import argparse
import json
import random
from pathlib import Path

# canonical (already evaluation-normalized) word pools
POOLS = {
    "AMH": "የሰው ልጆች ሁሉ ነጻ በክብርም በመብትም እኩል ሆነው ተወልደዋል ሰላም ቤት ልጅ".split(),
    "TIR": "ብመንጽር ክብርን መሰልን ኩሎም ሰባት እንትውለዱ ነጻን ማእሪን እዮም ሰላም".split(),
    "ORM": "namooti hundinuu birmaduu ta'anii mirgaa fi ulfinaanis wal-qixxee dhalatan hoomaa sammuu".split(),
    "SID": "manchi beetti kalaqamunni wolaphinoho ayirrinyunninna qoossotennino taaloho siinna".split(),
    "WAL": "ubba asaykka la'an daanawu yelettiis qassikka bonchchuwaaninne maatan lagge".split(),
}
GEEZ = {"AMH", "TIR"}
NOVEL = "9"  # never occurs in a reference

# canonical Ge'ez series -> a homophone series that folds back onto it
VARIANT_BASES = {0x1200: 0x1210, 0x1230: 0x1220, 0x12A0: 0x12D0, 0x1338: 0x1340}

# (substitutions, deletions, insertions, chars changed per substituted word)
PLAN = [
    (0, 0, 0, 0),
    (1, 0, 0, 1),
    (2, 0, 0, 1),
    (0, 1, 0, 0),
    (0, 0, 1, 0),
    (1, 1, 0, 2),
    (1, 0, 1, 1),
    (0, 0, 0, 0),
    (0, 2, 0, 0),
    (0, 0, 2, 0),
]
GENDERS = {
    "AMH": ["M", "M", "F", "F", "M", "F", "unknown", "M", "F", "unknown"],
    "TIR": ["M", "F", "M", "F", "M", "F", "M", "F", "unknown", "unknown"],
    "ORM": ["F", "M", "F", "M", "F", "M", "unknown", "F", "M", "F"],
    "SID": ["M", "F", "F", "M", "M", "F", "F", "M", "unknown", "F"],
    # no male test speakers, so the gender delta is undefined
    "WAL": ["F", "F", "F", "unknown", "F", "F", "F", "unknown", "F", "F"],
}
# utterance index -> predicted language ("" = no LID token emitted)
LID_ERRORS = {"AMH": {3: "TIR"}, "TIR": {0: "AMH", 7: ""}, "SID": {5: "ORM"}, "WAL": {}, "ORM": {}}
# second system: extra substitutions on these utterance indices
SYSTEM_B_EXTRA = {"AMH": [0, 7], "TIR": [0], "ORM": [1, 7], "SID": [], "WAL": [0, 3, 7]}


def geez_variant(word, rng):
    spots = []
    for k, ch in enumerate(word):
        for base, var in VARIANT_BASES.items():
            if base <= ord(ch) < base + 7:
                spots.append((k, chr(var + ord(ch) - base)))
    if not spots:
        return word
    k, ch = rng.choice(spots)
    return word[:k] + ch + word[k + 1 :]


def surface(words, lang, rng):
    """Inject noise that evaluation normalization must undo."""
    words = list(words)
    if lang in GEEZ:
        words = [geez_variant(w, rng) if rng.random() < 0.5 else w for w in words]
        text = words[0]
        for w in words[1:]:
            sep = rng.choice([" ", " ", "፡", "፣ "])
            text += sep + w
        return text + rng.choice(["።", " ።", "፧"])
    words = [w.replace("'", "’") if rng.random() < 0.3 else w for w in words]
    words[0] = words[0][0].upper() + words[0][1:]
    text = words[0]
    for w in words[1:]:
        text += rng.choice([" ", " ", ", ", "; "]) + w
    return text + rng.choice([".", "?", "!"])


def substitute(word, n_chars, rng):
    positions = sorted(rng.sample(range(len(word)), min(n_chars, len(word))))
    chars = list(word)
    for p in positions:
        chars[p] = NOVEL
    return "".join(chars), len(positions)


def apply_plan(ref, plan, rng):
    """Return hypothesis words and (word_errors, char_errors)."""
    n_sub, n_del, n_ins, sub_chars = plan
    n = len(ref)
    # slots are pairwise non-adjacent so operations never interact
    slots = list(range(0, n, 2))
    rng.shuffle(slots)
    sub_at = set(slots[:n_sub])
    del_at = set(slots[n_sub : n_sub + n_del])
    ins_after = set(slots[n_sub + n_del : n_sub + n_del + n_ins])
    hyp = []
    char_err = 0
    for k, w in enumerate(ref):
        if k in del_at:
            char_err += len(w) + 1
            continue
        if k in sub_at:
            w, c = substitute(w, sub_chars, rng)
            char_err += c
        hyp.append(w)
        if k in ins_after:
            new = NOVEL * rng.randint(2, 4)
            hyp.append(new)
            char_err += len(new) + 1
    return hyp, n_sub + n_del + n_ins, char_err


def build(out: Path, seed: int = 2026):
    rng = random.Random(seed)
    manifest, hyps_a, hyps_b, expected = [], [], [], []
    for lang, pool in POOLS.items():
        for k in range(10):
            uid = f"{lang.lower()}_{k:03d}"
            ref = rng.sample(pool, rng.randint(6, min(9, len(pool))))
            hyp, w_err, c_err = apply_plan(ref, PLAN[k], rng)
            pred = LID_ERRORS[lang].get(k, lang)
            gender = GENDERS[lang][k]
            manifest.append({
                "id": uid, "language": lang, "split": "test", "gender": gender,
                "duration_s": round(rng.uniform(2.0, 12.0), 3), "text": surface(ref, lang, rng),
                "audio_path": f"audio/{lang.lower()}/{uid}.wav",
            })
            rec = {"id": uid, "text": surface(hyp, lang, rng) if hyp else ""}
            if pred:
                rec["predicted_lang"] = pred
            hyps_a.append(rec)

            # system B: A plus one more novel substitution on an untouched word
            hyp_b = list(hyp)
            w_err_b, c_err_b = w_err, c_err
            if k in SYSTEM_B_EXTRA[lang]:
                clean = [j for j, w in enumerate(hyp_b) if NOVEL not in w and w in ref]
                j = clean[0]
                hyp_b[j], c = substitute(hyp_b[j], 1, rng)
                w_err_b += 1
                c_err_b += c
            rec_b = {"id": uid, "text": surface(hyp_b, lang, rng)}
            if pred:
                rec_b["predicted_lang"] = pred
            hyps_b.append(rec_b)

            expected.append({
                "id": uid, "language": lang, "gender": gender, "predicted_lang": pred or None,
                "ref_words": len(ref), "ref_chars": len(" ".join(ref)),
                "word_errors": w_err, "char_errors": c_err,
                "word_errors_b": w_err_b, "char_errors_b": c_err_b,
            })

    # a handful of non-test utterances for the duration report
    extra = [
        ("AMH", "train", "M", 3600.0), ("AMH", "train", "M", 3600.0), ("AMH", "train", "F", 1800.0),
        ("ORM", "validation", "F", 900.0), ("TIR", "train", "unknown", 720.0), ("WAL", "validation", "M", 36.0),
    ]
    for j, (lang, split, gender, dur) in enumerate(extra):
        manifest.append({
            "id": f"extra_{j:02d}", "language": lang, "split": split, "gender": gender,
            "duration_s": dur, "text": " ".join(POOLS[lang][:3]),
        })

    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "manifest.jsonl", manifest)
    write_jsonl(out / "hyp_a.jsonl", hyps_a)
    write_jsonl(out / "hyp_b.jsonl", hyps_b)
    (out / "expected.json").write_text(json.dumps(expected, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    build_minimal_pairs(out)


# (reference word, hypothesis word, error class)
MINIMAL_PAIRS = {
    "ORM": [("hoomaa", "homaa", "vowel"), ("sammuu", "samuu", "gem"), ("namooti", "namoti", "vowel"),
            ("mirgaa", "mirga", "vowel"), ("ulfinaanis", "ulfinnaanis", "gem"), ("fi", "fi", None)],
    "SID": [("siinna", "sinna", "vowel"), ("beetti", "beeti", "gem"), ("manchi", "manchi", None),
            ("kalaqamunni", "kalaqamuni", "gem"), ("taaloho", "taloho", "vowel")],
    "WAL": [("asaykka", "asayka", "gem"), ("daanawu", "danawu", "vowel"), ("lagge", "lage", "gem"),
            ("yelettiis", "yeletiis", "gem"), ("ubba", "ubba", None), ("maatan", "matan", "vowel")],
}


def build_minimal_pairs(out: Path):
    manifest, hyps = [], []
    for lang, pairs in MINIMAL_PAIRS.items():
        for k in range(0, len(pairs), 2):
            chunk = pairs[k : k + 2]
            uid = f"mp_{lang.lower()}_{k // 2}"
            manifest.append({"id": uid, "language": lang, "split": "test", "gender": "unknown",
                             "duration_s": 1.0, "text": " ".join(r for r, _, _ in chunk)})
            hyps.append({"id": uid, "text": " ".join(h for _, h, _ in chunk), "predicted_lang": lang})
    write_jsonl(out / "minimal_pairs_manifest.jsonl", manifest)
    write_jsonl(out / "minimal_pairs_hyp.jsonl", hyps)


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "fixtures")
    ap.add_argument("--seed", type=int, default=2026)
    args = ap.parse_args()
    build(args.out, args.seed)
    print(f"fixture written to {args.out}")
