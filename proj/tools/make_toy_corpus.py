"""Regenerates data/toy: a small English corpus, a reversed-word pseudo
translation, CoNLL tag files, a vocabulary and synthetic embeddings."""

import argparse
import json
import struct
from pathlib import Path

import numpy as np

NAMES = [["Anna", "Perera"], ["Kumar"], ["Nimal"], ["Sara", "Silva"], ["Ravi"], ["Meena"]]
PLACES = ["Colombo", "Kandy", "Jaffna", "Galle", "Madurai"]
VERBS = ["carried", "painted", "visited", "repaired", "watched", "ordered", "found"]
NOUNS = ["boat", "bridge", "lantern", "market", "temple", "bicycle", "letter", "garden"]
ADJS = ["old", "quiet", "bright", "broken", "small", "famous"]
PREPS = ["near", "in", "beyond"]

NOISE = [
    "<div>click here for offers</div>",
    "visit www.example.com for more",
    "12345 67890 !!! ###",
]


def make_sentence(rng):
    """Returns (words, ner, pos)."""
    name = NAMES[rng.integers(len(NAMES))]
    words, ner, pos = [], [], []
    for i, w in enumerate(name):
        words.append(w)
        ner.append(("B-" if i == 0 else "I-") + "PER")
        pos.append("NNP")
    words += [VERBS[rng.integers(len(VERBS))], "the"]
    ner += ["O", "O"]
    pos += ["VBD", "DT"]
    if rng.random() < 0.6:
        words.append(ADJS[rng.integers(len(ADJS))])
        ner.append("O")
        pos.append("JJ")
    words.append(NOUNS[rng.integers(len(NOUNS))])
    ner.append("O")
    pos.append("NN")
    if rng.random() < 0.7:
        words += [PREPS[rng.integers(len(PREPS))], PLACES[rng.integers(len(PLACES))]]
        ner += ["O", "B-LOC"]
        pos += ["IN", "NNP"]
    words.append(".")
    ner.append("O")
    pos.append(".")
    return words, ner, pos


def translate(words, ner):
    # entities and punctuation are copied, everything else is reversed
    return [w if tag != "O" or w == "." else w[::-1] for w, tag in zip(words, ner)]


def write_conll(path, sentences, column):
    with open(path, "w", encoding="utf-8") as f:
        for sent in sentences:
            for w, t in zip(sent[0], sent[column]):
                f.write(f"{w}\t{t}\n")
            f.write("\n")


def build_vocab(words):
    tokens = ["<pad>", "<s>", "</s>", "<sep>", "<mask>", "<unk>", "."]
    letters = sorted({c for w in words for c in w if c.isalpha()})
    tokens += letters + ["##" + c for c in letters]
    for w in sorted(set(words)):
        if w == ".":
            continue
        if len(w) <= 6:
            tokens.append(w)
        else:
            tokens += [w[:4], "##" + w[4:]]
    seen, out = set(), []
    for t in tokens:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def write_emb(path, matrix, ids):
    matrix = matrix / np.linalg.norm(matrix, axis=1, keepdims=True)
    n, d = matrix.shape
    with open(path, "wb") as f:
        f.write(b"LEMEMB01")
        f.write(struct.pack("<IIB", n, d, 1))
        f.write(matrix.astype("<f4").tobytes())
        f.write(np.asarray(ids, dtype="<u8").tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data" / "toy")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=20240501)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    src = [make_sentence(rng) for _ in range(args.n)]
    tgt = []
    for words, ner, pos in src:
        tgt.append((translate(words, ner), ner, pos))

    # noise goes last so that kept sentence ids are 0..n-1 on both sides
    (out / "en.txt").write_text("\n".join([" ".join(s[0]) for s in src] + NOISE) + "\n", encoding="utf-8")
    (out / "xx.txt").write_text("\n".join(" ".join(s[0]) for s in tgt) + "\n", encoding="utf-8")
    write_conll(out / "en.ner.conll", src, 1)
    write_conll(out / "en.pos.conll", src, 2)
    write_conll(out / "xx.ner.conll", tgt, 1)

    all_words = [w for s in src + tgt for w in s[0]]
    (out / "vocab.txt").write_text("\n".join(build_vocab(all_words)) + "\n", encoding="utf-8")
    specials = {"bos": "<s>", "eos": "</s>", "sep": "<sep>", "mask": "<mask>",
                "pad": "<pad>", "unk": "<unk>", "continuation_prefix": "##"}
    (out / "specials.json").write_text(json.dumps(specials, indent=1) + "\n", encoding="utf-8")

    with open(out / "pairs.tsv", "w", encoding="utf-8") as f:
        for i in range(args.n):
            f.write(f"{i}\t{i}\t{i}\n")
    with open(out / "pairs.jsonl", "w", encoding="utf-8") as f:
        for i in range(args.n):
            f.write(json.dumps({"id": i, "src": " ".join(src[i][0]), "tgt": " ".join(tgt[i][0])}) + "\n")

    # translations sit close to their source; the last three target rows are
    # pushed away so mining leaves them unmatched
    d = 16
    x = rng.standard_normal((args.n, d))
    y = x + 0.3 * rng.standard_normal((args.n, d))
    y[-3:] = rng.standard_normal((3, d))
    ids = list(range(args.n))
    write_emb(out / "src.emb", x, ids)
    write_emb(out / "tgt.emb", y, ids)
    with open(out / "gold.tsv", "w", encoding="utf-8") as f:
        for i in range(args.n):
            f.write(f"{i}\t{i}\n")


if __name__ == "__main__":
    main()
