#!/usr/bin/env python3
"""Writes the bundled toy treebank and its transitivity lexicon.

Every exposure bucket gets 22 singular and 22 plural nouns (two of each seen
once in a polar question), 20+20 infinitival verbs, and 20 passivized
transitive, 20 active-only transitive and 20 intransitive past forms. Filler
words occur more than 100 times so they stay out of the buckets.

usage: make_toy_treebank.py OUT_DIR
"""

import itertools
import random
import sys
from collections import Counter
from pathlib import Path

BUCKETS = [(2, 2), (3, 3), (4, 4), (5, 5), (6, 10), (11, 20), (21, 30), (50, 100)]
NOUNS_PER_CELL = 22
POLAR_PER_CELL = 2
VERBS_PER_CELL = 20
FILLER_REPEATS = 150

SUBJECTS = ["doctor", "man", "woman"]
OBJECTS = [("the", "DT", "patient", "NN"), ("the", "DT", "house", "NN"), ("the", "DT", "dog", "NN")]
PREDICATES = [("ADJP", "JJ", "ready"), ("ADVP", "RB", "here"), ("ADJP", "JJ", "old"), ("ADJP", "JJ", "new")]
MODALS = ["can", "will", "should"]
ADVERBS = ["today", "yesterday"]
IRREGULAR = [("gave", "transitive", 5), ("took", "transitive", 3), ("rose", "intransitive", 4), ("fell", "intransitive", 10)]
MIXED = [("bundered", 60), ("kessaled", 70), ("morvade", 55), ("pintoge", 80)]


def pseudo_words(n, rng, taken):
    cons, vows = "bdfgklmnprstvz", "aeiou"
    shapes = itertools.product(cons, vows, cons, vows, cons)
    pool = ["".join(s) for s in shapes]
    rng.shuffle(pool)
    out = []
    for w in pool:
        forms = {w, w + "s", w + "ed"}
        if forms & taken:
            continue
        taken |= forms
        out.append(w)
        if len(out) == n:
            return out
    raise SystemExit("ran out of pseudo-words")


def counts_for(lo, hi, n):
    return [lo + i % (hi - lo + 1) for i in range(n)]


def copula(plural, past):
    if past:
        return ("VBD", "were" if plural else "was")
    return ("VBP", "are") if plural else ("VBZ", "is")


def np(det, dtag, noun, ntag):
    return f"(NP ({dtag} {det}) ({ntag} {noun}))"


def pred(i):
    phrase, tag, word = PREDICATES[i % len(PREDICATES)]
    return f"({phrase} ({tag} {word}))"


def declarative(noun, ntag, plural, i):
    vtag, verb = copula(plural, i % 2 == 1)
    return f"(S {np('The', 'DT', noun, ntag)} (VP ({vtag} {verb}) {pred(i)}) (. .))"


def question(noun, ntag, plural, i, modifier=False):
    vtag, verb = copula(plural, i % 2 == 1)
    verb = verb.capitalize()
    if modifier:
        subj = f"(NP (DT the) (ADJP (RB very) (JJ big) (CC and) (JJ important)) ({ntag} {noun}))"
    else:
        subj = np("the", "DT", noun, ntag)
    return f"(SQ ({vtag} {verb}) {subj} {pred(i)} (. ?))"


def subject(i):
    return np("The", "DT", SUBJECTS[i % len(SUBJECTS)], "NN")


def obj(i):
    d, dt, n, nt = OBJECTS[i % len(OBJECTS)]
    return f"(NP ({dt} {d}) ({nt} {n}))"


def adverb(i):
    return f"(ADVP (RB {ADVERBS[i % 2]}))"


def vb_use(verb, transitive, i):
    inner = f"(VB {verb})" + (f" {obj(i)}" if transitive else "") + f" {adverb(i)}"
    return f"(S {subject(i)} (VP (MD {MODALS[i % 3]}) (VP {inner})) (. .))"


def vbd_use(verb, transitive, i):
    inner = f"(VBD {verb})" + (f" {obj(i)}" if transitive else "") + f" {adverb(i)}"
    return f"(S {subject(i)} (VP {inner}) (. .))"


def vbn_use(verb, i):
    d, dt, n, nt = OBJECTS[i % len(OBJECTS)]
    return f"(S {np('The', 'DT', n, nt)} (VP (VBD was) (VP (VBN {verb}) {adverb(i)})) (. .))"


def fillers():
    out = []
    for i in range(FILLER_REPEATS):
        pl = i % 2 == 1
        head, tag = ("men", "NNS") if pl else ("man", "NN")
        for mod in (False, True):
            for past in (False, True):
                out.append(question(head if not mod else ("lawyers" if pl else "house"), tag, pl, i * 2 + past, mod))
        vtag, verb = copula(pl, i % 2 == 0)
        for near in ["(IN near) (NP (DT the) (JJ old) (NN house))", "(IN near) (NP (DT the) (JJ big) (NN house))",
                     "(IN behind) (NP (DT the) (JJ new) (NN house))"]:
            out.append(f"(S (NP (NP (DT The) ({tag} {head})) (PP {near})) (VP ({vtag} {verb}) {pred(i)}) (. .))")
        for rel in ["(NP (DT the) (NN man)) (VP (VBD saw))", "(NP (DT the) (NNS lawyers)) (VP (VBP like))",
                    "(NP (DT the) (NN doctor)) (VP (VBD helped))"]:
            out.append(f"(S (NP (NP (DT The) ({tag} {head})) (SBAR (WHNP (WDT that)) (S {rel}))) "
                       f"(VP ({vtag} {verb}) {pred(i + 1)}) (. .))")
        short = ["(RB quickly) (CC and) (RB fully)", "(RB slowly) (CC and) (RB carefully)"][i % 2]
        long = ["(RB quickly) (, ,) (RB suddenly) (, ,) (CC and) (RB entirely)",
                "(RB slowly) (, ,) (RB carefully) (, ,) (CC and) (RB fully)"][i % 2]
        for mod in (short, long):
            out.append(f"(S {subject(i)} (VP (VBD was) (ADVP {mod}) (VP (VBN helped) {adverb(i)})) (. .))")
            out.append(f"(S {subject(i + 1)} (VP (ADVP {mod}) (VBD helped) {obj(i)} {adverb(i)}) (. .))")
        out.append(f"(S (NP (DT The) (NNS dogs)) (VP (VBP are) (ADJP (RB very) (JJ big) (CC and) (JJ important))) (. .))")
        out.append(f"(S (NP (DT The) (NNS doctors)) (VP (VBD were) {pred(i)}) (. .))")
    return out


def main():
    out_dir = Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    rng = random.Random(20190601)
    taken = set(SUBJECTS) | {o[2] for o in OBJECTS} | {p[2] for p in PREDICATES} | set(MODALS) | set(ADVERBS)
    taken |= {v for v, _, _ in IRREGULAR} | {v for v, _ in MIXED}
    taken |= {"men", "lawyers", "house", "dogs", "doctors", "helped", "saw", "like"}

    sentences = []
    lexicon = []
    target_forms = set()

    for lo, hi in BUCKETS:
        counts = counts_for(lo, hi, NOUNS_PER_CELL)
        for plural in (False, True):
            tag = "NNS" if plural else "NN"
            for k, (lemma, n) in enumerate(zip(pseudo_words(NOUNS_PER_CELL, rng, taken), counts)):
                noun = lemma + "s" if plural else lemma
                target_forms.add(noun)
                for i in range(n):
                    if k < POLAR_PER_CELL and i == 0:
                        sentences.append(question(noun, tag, plural, k))
                    else:
                        sentences.append(declarative(noun, tag, plural, i + k))

        counts = counts_for(lo, hi, VERBS_PER_CELL)
        for transitive in (True, False):
            label = "transitive" if transitive else "intransitive"
            for k, (verb, n) in enumerate(zip(pseudo_words(VERBS_PER_CELL, rng, taken), counts)):
                lexicon.append((verb, label))
                target_forms.add(verb)
                sentences += [vb_use(verb, transitive, i + k) for i in range(n)]

        for kind in ("passivized", "active", "intransitive"):
            for k, (lemma, n) in enumerate(zip(pseudo_words(VERBS_PER_CELL, rng, taken), counts)):
                verb = lemma + "ed"
                lexicon.append((verb, "intransitive" if kind == "intransitive" else "transitive"))
                target_forms.add(verb)
                for i in range(n):
                    if kind == "passivized" and i % 2 == 1:
                        sentences.append(vbn_use(verb, i + k))
                    else:
                        sentences.append(vbd_use(verb, kind != "intransitive", i + k))

    for verb, label, n in IRREGULAR:
        lexicon.append((verb, label))
        target_forms.add(verb)
        sentences += [vbd_use(verb, label == "transitive", i) for i in range(n)]
    # Marked transitive but objectless half the time: excluded by the threshold.
    for verb, n in MIXED:
        lexicon.append((verb, "transitive"))
        target_forms.add(verb)
        use = vbd_use if verb.endswith("ed") else vb_use
        sentences += [use(verb, i % 2 == 0, i) for i in range(n)]

    sentences += fillers()
    rng.shuffle(sentences)

    # Non-target words must stay out of the exposure buckets.
    counts = Counter()
    for s in sentences:
        parts = s.split(")")
        for p in parts:
            bits = p.split()
            if len(bits) >= 2 and bits[-2].startswith("("):
                counts[bits[-1]] += 1
    bad = sorted(w for w, c in counts.items()
                 if w not in target_forms and (2 <= c <= 30 or 50 <= c <= 100))
    if bad:
        raise SystemExit(f"filler words inside a bucket: {bad}")
    low = sorted(w for w, c in counts.items() if w not in target_forms and c < 50)
    if low:
        raise SystemExit(f"filler words below 50: {low}")

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "toy_treebank.mrg").write_text("\n".join(sentences) + "\n")
    lexicon.sort()
    (out_dir / "transitivity.tsv").write_text("".join(f"{v}\t{c}\n" for v, c in lexicon))
    print(f"{len(sentences)} sentences, {len(counts)} word types, {len(lexicon)} lexicon verbs")


if __name__ == "__main__":
    main()
