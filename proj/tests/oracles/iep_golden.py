#!/usr/bin/env python3
# Copyright 2026 The DMP Platform Authors.
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

"""Reference word-cloud and phrase outputs for the IEP golden corpus.

Usage: iep_golden.py RESOURCE_DIR CORPUS OUT_DIR
Writes wordcloud.golden.tsv (term<TAB>count) and phrases.golden.txt
(one line per document, phrases joined by " | ").
"""
import json
import sys
from collections import Counter
from pathlib import Path

PATTERNS = {("ADJ", "NOUN"), ("NOUN", "NOUN"), ("VERB", "NOUN"),
            ("ADJ", "ADJ", "NOUN"), ("NOUN", "NOUN", "NOUN")}


def read_tsv(path):
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        key, tag = line.split("\t")
        rows.append((key, tag))
    return rows


def is_word_byte(b):
    return b >= 0x80 or chr(b).isascii() and chr(b).isalnum()


def tokenize(text):
    data = text.encode("utf-8")
    tokens, cur = [], bytearray()
    for b in data:
        if not is_word_byte(b):
            if cur:
                tokens.append(bytes(cur))
            cur = bytearray()
            continue
        if cur and (chr(cur[-1]).isdigit() and cur[-1] < 0x80) != (b < 0x80 and chr(b).isdigit()):
            tokens.append(bytes(cur))
            cur = bytearray()
        cur.append(ord(chr(b).lower()) if b < 0x80 else b)
    if cur:
        tokens.append(bytes(cur))
    return [t.decode("utf-8") for t in tokens]


def main():
    res, corpus, out = (Path(a) for a in sys.argv[1:4])
    words = dict(read_tsv(res / "iep" / "lexicon.tsv"))
    suffixes = sorted(read_tsv(res / "iep" / "suffixes.tsv"), key=lambda s: -len(s[0]))
    rules = json.loads((res / "iep" / "phrase_rules.json").read_text())
    patterns = {tuple(p) for p in rules["patterns"]}
    assert patterns <= PATTERNS
    stoplist = {w.lower() for w in rules.get("stoplist", [])}
    stopwords = {l for l in (res / "iep" / "stopwords.txt").read_text().splitlines()
                 if l and not l.startswith("#")}

    def tag(tok):
        if tok in words:
            return words[tok]
        if tok.isascii() and tok.isdigit():
            return "NUM"
        for suf, t in suffixes:
            if len(tok) > len(suf) and tok.endswith(suf):
                return t
        return "OTHER"

    counts = Counter()
    phrase_lines = []
    for doc in corpus.read_text(encoding="utf-8").splitlines():
        toks = tokenize(doc)
        tags = [tag(t) for t in toks]
        for t, g in zip(toks, tags):
            if g in ("NOUN", "VERB", "ADJ") and t not in stopwords:
                counts[t] += 1
        phrases = []
        for end in range(1, len(toks)):
            for n in (2, 3):
                lo = end + 1 - n
                if lo < 0:
                    continue
                if tuple(tags[lo:end + 1]) in patterns and not set(toks[lo:end + 1]) & stoplist:
                    phrases.append(" ".join(toks[lo:end + 1]))
        counts.update(phrases)
        phrase_lines.append(" | ".join(phrases))

    entries = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].encode("utf-8")))
    (out / "wordcloud.golden.tsv").write_text("".join(f"{t}\t{c}\n" for t, c in entries), encoding="utf-8")
    (out / "phrases.golden.txt").write_text("".join(l + "\n" for l in phrase_lines), encoding="utf-8")


if __name__ == "__main__":
    main()
