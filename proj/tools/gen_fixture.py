#!/usr/bin/env python3
"""Regenerates data/fixtures/pattern_eval.jsonl.

Thirty synthetic QA records in two families:

* ``saturated``  - the answer equals the reference verbatim, so rescued and
  base scores coincide exactly for every metric.
* ``borrower``   - the answer appends two extra tokens that appear in the
  retrieval context individually but never adjacently, so unigram overlap
  finds context support while bigram overlap does not.

Every record is verified through the halleval bindings before writing.
Run from the repository root after building/installing the Python module.
"""

import json
import os
import sys

import halleval

OUT = os.path.join(os.path.dirname(__file__), "..", "data", "fixtures",
                   "pattern_eval.jsonl")

# (question, answer sentence, (extra_x, extra_y))
BORROWER = [
    ("Dove si trova il Colosseo?",
     "Il Colosseo si trova a Roma", ("ospita", "concerti")),
    ("Quale fiume attraversa Torino?",
     "Il Po attraversa Torino", ("alimenta", "centrali")),
    ("Dove nasce il fiume Adige?",
     "L'Adige nasce in Alto Adige", ("irriga", "frutteti")),
    ("Chi dipinse la Gioconda?",
     "Leonardo dipinse la Gioconda", ("studiando", "anatomia")),
    ("Dove sorge la Mole Antonelliana?",
     "La Mole Antonelliana sorge a Torino", ("custodisce", "pellicole")),
    ("In quale regione italiana si trova Matera?",
     "Matera si trova in Basilicata", ("attira", "registi")),
    ("In quale città si tiene il Salone del Libro?",
     "Il Salone del Libro si tiene a Torino", ("coinvolge", "editori")),
    ("Quale vulcano domina il golfo di Napoli?",
     "Il Vesuvio domina il golfo di Napoli", ("preoccupa", "vulcanologi")),
    ("Quando fu completata la Torre di Pisa?",
     "La torre fu completata nel 1372", ("pende", "visibilmente")),
    ("Qual è l'isola più estesa del Mediterraneo?",
     "La Sicilia è la più estesa", ("produce", "agrumi")),
    ("Per quale motivo Venezia risulta minacciata dall'acqua alta?",
     "Venezia sorge su una laguna", ("subisce", "maree")),
    ("Quali città furono sepolte dall'eruzione del 79 dopo Cristo?",
     "Pompei ed Ercolano furono sepolte", ("conserva", "affreschi")),
    ("Quale città ospita il più antico ateneo del mondo occidentale?",
     "Bologna ospita l'ateneo più antico", ("accoglie", "studiosi")),
    ("Quale trattato del 1957 istituì la Comunità Economica Europea?",
     "Il trattato fu firmato a Roma", ("avviò", "integrazione")),
    ("Quale città fu la prima capitale del Regno d'Italia nel 1861?",
     "Torino fu la prima capitale", ("precedette", "firenze")),
]

SATURATED = [
    ("Qual è la capitale d'Italia?", "La capitale è Roma"),
    ("Quante regioni ha l'Italia?", "L'Italia ha venti regioni"),
    ("Quale mare bagna la Liguria?", "Il Mar Ligure bagna la Liguria"),
    ("Dove si parla il ladino?", "Il ladino si parla nelle Dolomiti"),
    ("Qual è il lago più grande?", "Il Garda è il lago più grande"),
    ("Quale moneta si usa in Italia dal 2002?",
     "Dal 2002 si usa l'euro"),
    ("Quale catena separa l'Italia dalla Francia?",
     "Le Alpi separano Italia e Francia"),
    ("Dove si trova il teatro alla Scala?",
     "La Scala si trova a Milano"),
    ("Chi osservò per primo i satelliti di Giove?",
     "Galileo osservò i satelliti di Giove"),
    ("Quando l'Italia divenne una repubblica?",
     "L'Italia divenne repubblica nel 1946"),
    ("Quale poeta fiorentino scrisse la Divina Commedia in volgare?",
     "Dante scrisse la Divina Commedia"),
    ("Quale esploratore genovese attraversò l'Atlantico nel 1492?",
     "Colombo attraversò l'Atlantico nel 1492"),
    ("Quale fisico bolognese vinse il Nobel per la radio nel 1909?",
     "Marconi vinse il Nobel nel 1909"),
    ("Quale antica via romana collegava Roma a Brindisi nel sud?",
     "La via Appia collegava Roma a Brindisi"),
    ("Quale repubblica marinara costruì l'arsenale più grande d'Europa?",
     "Venezia costruì l'arsenale più grande"),
]


def borrower_record(idx, question, answer, extras):
    x, y = extras
    system = f"{answer} {x} {y}."
    context = (f"{answer}. Secondo le cronache {x} inoltre numerosi eventi "
               f"e {y} di rilievo.")
    return {
        "id": f"pat-{idx:02d}",
        "model": "borrower",
        "level": halleval.classify_level(question),
        "question": question,
        "reference": f"{answer}.",
        "system": system,
        "context": context,
    }


def saturated_record(idx, question, answer):
    return {
        "id": f"pat-{idx:02d}",
        "model": "saturated",
        "level": halleval.classify_level(question),
        "question": question,
        "reference": f"{answer}.",
        "system": f"{answer}.",
        "context": f"{answer}. Lo riportano le agenzie di stampa nazionali.",
    }


def verify(rec):
    cfg = halleval.NormalizationConfig()
    sys_t = halleval.tokenize(rec["system"], cfg)
    ref_t = halleval.tokenize(rec["reference"], cfg)
    ctx_t = halleval.tokenize(rec["context"], cfg)
    for metric in ("rouge1", "rouge2", "rougeL", "bleu", "meteor"):
        for b in halleval.evaluate_nmiss(sys_t, ref_t, ctx_t, metric):
            assert b.rescued >= b.base, (rec["id"], metric)
            if rec["model"] == "saturated":
                assert b.rescued == b.base, (rec["id"], metric, "saturated delta")
    if rec["model"] == "borrower":
        r1 = halleval.evaluate_nmiss(sys_t, ref_t, ctx_t, "rouge1")
        r2 = halleval.evaluate_nmiss(sys_t, ref_t, ctx_t, "rouge2")
        assert r1[0].rescued > r1[0].base, (rec["id"], "unigram rescue missing")
        assert all(b.rescued == b.base for b in r2), (rec["id"], "bigram rescue leaked")
        # The two extra tokens are context-supported but never adjacent there.
        residual = halleval.partition_tokens(sys_t, ref_t)[1]
        assert len(residual) == 2, (rec["id"], residual)
        for tok in residual:
            assert tok in ctx_t, (rec["id"], tok)
        pairs = list(zip(ctx_t, ctx_t[1:]))
        assert tuple(residual) not in pairs, (rec["id"], "adjacent extras")


def main():
    records = []
    idx = 1
    for question, answer, extras in BORROWER:
        records.append(borrower_record(idx, question, answer, extras))
        idx += 1
    for question, answer in SATURATED:
        records.append(saturated_record(idx, question, answer))
        idx += 1

    assert len(records) == 30
    levels = [r["level"] for r in records]
    for band in ("LOW", "MID", "HIGH"):
        assert levels.count(band) >= 6, (band, levels.count(band))
    for rec in records:
        verify(rec)

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as out:
        for rec in records:
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"wrote {len(records)} records -> {os.path.normpath(OUT)}")


if __name__ == "__main__":
    sys.exit(main())
