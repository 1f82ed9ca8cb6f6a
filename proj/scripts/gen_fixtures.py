#!/usr/bin/env python3
"""Generate the synthetic fixture corpora, stub scripts and oracle manifests.

Everything here is deterministic (fixed seeds) and independent of the C++
implementation: expected predictions, gateway call counts, label frequencies
and instruction-record counts are computed directly from the generated
behaviors, then frozen into *.manifest.json files that the tests read.

Usage: python3 scripts/gen_fixtures.py [repo_root]
"""

import json
import random
import sys
from collections import Counter, OrderedDict
from pathlib import Path

import yaml

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"
KINDS = ["TASK_ONLY", "WITH_DEFINITIONS", "ONE_SHOT", "TWO_SHOT", "CHAIN_OF_THOUGHT"]


def load_taxonomy(name):
    doc = yaml.safe_load((ROOT / "taxonomies" / f"{name}.taxonomy").read_text())
    by_code = {n["code"]: n for n in doc["nodes"]}
    children = OrderedDict()
    for n in doc["nodes"]:
        for p in n["parents"]:
            children.setdefault(by_code[p]["name"], []).append(n["name"])
    level1 = [n["name"] for n in doc["nodes"] if n["level"] == 1]
    return level1, children


def write_jsonl(path, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_yaml(path, doc, header):
    path.parent.mkdir(parents=True, exist_ok=True)
    body = yaml.safe_dump(doc, sort_keys=False, allow_unicode=True, width=1000)
    path.write_text(f"# {header}\n" + body, encoding="utf-8")


def write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


COMPANIES = ["Northwind", "Acme Cloud", "Bluefin Apps", "Cedar Health", "Dovetail Games",
             "Elmstreet Media", "Foxglove Travel", "Granite Bank", "Harbor Books",
             "Ivy Learning", "Juniper Maps", "Kestrel Fitness", "Lumen Music"]

# ---------------------------------------------------------------------------
# OPP-115 sentences, one pool per category.
OPP_SENTENCES = {
    "First Party Collection/Use": [
        "{c} collects your email address and device identifiers when you create an account.",
        "We use the purchase history {c} stores to improve product recommendations.",
        "{c} records your approximate location to show nearby offers.",
    ],
    "Third Party Sharing/Collection": [
        "{c} shares aggregated usage data with advertising partners.",
        "Analytics providers working for {c} may place their own tracking code in the app.",
        "We may sell contact details to marketing affiliates of {c}.",
    ],
    "User Choice/Control": [
        "You can opt out of promotional emails from {c} at any time.",
        "{c} lets you decline location tracking in the settings menu.",
    ],
    "User Access, Edit and Deletion": [
        "You may review and correct your {c} profile information from the account page.",
        "To delete your {c} account and associated data, contact our support team.",
    ],
    "Data Retention": [
        "{c} keeps transaction records for seven years.",
        "Log files are deleted by {c} after ninety days.",
    ],
    "Data Security": [
        "{c} encrypts payment data in transit using TLS.",
        "Access to personal data at {c} is restricted to authorized staff.",
    ],
    "Policy Change": [
        "{c} will notify you by email before material changes to this policy take effect.",
        "We may update this policy from time to time and {c} will post the new version here.",
    ],
    "Do Not Track": [
        "{c} does not currently respond to Do Not Track browser signals.",
        "Our site honors Do Not Track requests sent to {c}.",
    ],
    "International and Specific Audiences": [
        "{c} does not knowingly collect information from children under 13.",
        "California residents have additional rights regarding {c} data practices.",
    ],
    "Introductory/Generic": [
        "This policy describes how {c} handles information about you.",
        "Welcome to {c}; please read this notice carefully.",
    ],
    "Privacy Contact Information": [
        "Questions about this policy can be sent to privacy@{d}.example.",
        "You can reach the {c} privacy office by mail at our headquarters.",
    ],
    "Practice Not Covered": [
        "{c} sponsors community events in several cities.",
        "Gift cards issued by {c} do not expire.",
    ],
}


def opp_text(labels, company, idx, rng):
    parts = []
    for lab in labels:
        pool = OPP_SENTENCES[lab]
        parts.append(pool[rng.randrange(len(pool))].format(c=company, d=company.split()[0].lower()))
    parts.append(f"(Section {idx}.)")
    return " ".join(parts)


def gen_opp115():
    level1, _ = load_taxonomy("opp115")
    rng = random.Random(115)
    segs = []
    for doc in range(12):
        company = COMPANIES[doc]
        split = "train" if doc < 8 else ("val" if doc < 10 else "test")
        for k in range(5):
            idx = doc * 5 + k + 1
            n = rng.choice([1, 1, 1, 2, 2, 3])
            labels = sorted(rng.sample(level1, n), key=level1.index)
            segs.append({
                "id": f"opp-{idx:03d}",
                "doc_id": f"opp-doc-{doc:02d}",
                "lang": "en",
                "text": opp_text(labels, company, idx, rng),
                "labels": labels,
                "split": split,
            })
    write_jsonl(FIX / "corpora" / "opp115.jsonl", segs)

    # Sweep stub: one reply per (segment, kind). Noise level differs by kind.
    noise = {"TASK_ONLY": 0.45, "WITH_DEFINITIONS": 0.3, "ONE_SHOT": 0.2, "TWO_SHOT": 0.25,
             "CHAIN_OF_THOUGHT": 0.3}
    rules = []
    expected = {k: {} for k in KINDS}
    for kind in KINDS:
        krng = random.Random(f"opp115-{kind}")
        for s in segs:
            pred = list(s["labels"])
            if krng.random() < noise[kind] and len(pred) > 1:
                pred.pop(krng.randrange(len(pred)))
            if krng.random() < noise[kind]:
                extra = krng.choice(level1)
                if extra not in pred:
                    pred.append(extra)
            pred = sorted(pred, key=level1.index)
            reply = "; ".join(pred)
            if kind == "CHAIN_OF_THOUGHT":
                reply = ("Step 1: The segment describes a data practice.\n"
                         "Step 2: Compare it with each category definition.\n"
                         f"Answer: {reply}")
            rules.append({"match": {"segment": s["id"], "kind": kind}, "reply": reply})
            expected[kind][s["id"]] = pred
    write_yaml(FIX / "stub" / "opp115_sweep.script",
               {"rules": rules}, "Scripted replies for the OPP-115 prompt sweep fixture.")

    # Oracle: per-kind micro F1 over the 12 labels, computed from set comparisons.
    micro = {}
    for kind in KINDS:
        tp = fp = fn = 0
        for s in segs:
            g, p = set(s["labels"]), set(expected[kind][s["id"]])
            tp += len(g & p)
            fp += len(p - g)
            fn += len(g - p)
        micro[kind] = 2 * tp / (2 * tp + fp + fn)

    freq = Counter(l for s in segs for l in set(s["labels"]))
    write_json(FIX / "corpora" / "opp115.manifest.json", {
        "segments": len(segs),
        "documents": 12,
        "split_sizes": dict(Counter(s["split"] for s in segs)),
        "label_frequencies": {"1": {k: freq[k] for k in level1 if freq[k]}},
        "sweep_expected_predictions": expected,
        "sweep_micro_f1": micro,
    })


# ---------------------------------------------------------------------------
STUDY_SINGLE = [
    "Data Security", "Data Retention", "Policy Change", "Do Not Track",
    "First Party Collection/Use", "Third Party Sharing/Collection", "User Choice/Control",
    "User Access, Edit and Deletion", "International and Specific Audiences",
    "Privacy Contact Information",
]

DECOYS = [
    ("Data Security", "weak logicality: reasons from the word 'protect' instead of a security measure",
     "Data Security means keeping data safe. The segment talks about the company and the word safe appears, so it is related to Data Security because every company protects data."),
    ("Data Retention", "incomplete: ignores the concrete retention period stated in the segment",
     "Data Retention refers to how long information is stored. The segment is about storing information, which is relevant to this category."),
    ("Policy Change", "weak logicality: confuses notification of change with user consent",
     "Policy Change covers updates to the policy. The segment is relevant because users must consent to every change, which is what the segment says about notification."),
    ("Do Not Track", "poor comprehensibility: convoluted wording",
     "Do Not Track, being a signal-related notion regarding the non-tracking of browsing which pertains in a manner to advertising, is, insofar as the segment's statement on signals is concerned, relevant in that respect."),
    ("First Party Collection/Use", "incomplete: names the category without analyzing the collected data types",
     "First Party Collection/Use is about what the company collects. The segment is relevant."),
    ("Third Party Sharing/Collection", "weak logicality: attributes sharing to the user instead of the company",
     "Third Party Sharing/Collection describes sharing with others. The segment is relevant because users share their data with friends through the app."),
    ("User Choice/Control", "incomplete: omits the opt-out mechanism",
     "User Choice/Control is about choices users have. The segment mentions users, so it is relevant."),
    ("User Access, Edit and Deletion", "weak logicality: misreads deletion as retention",
     "User Access, Edit and Deletion concerns editing data. The segment is relevant because data is kept for a long time before users can see it."),
    ("International and Specific Audiences", "poor comprehensibility: fragmentary sentences",
     "Specific audiences. Children, maybe. Relevant since policy. Segment about groups, location too."),
    ("Privacy Contact Information", "incomplete and slightly off-topic",
     "Privacy Contact Information means contact details. The segment has an address, and also the company values its customers."),
]


def gen_study():
    level1, _ = load_taxonomy("opp115")
    rng = random.Random(5)
    segs = []
    eligible = [l for l in level1 if l != "Practice Not Covered"]
    for i in range(130):
        doc = i // 10
        company = COMPANIES[doc % len(COMPANIES)]
        if i < len(STUDY_SINGLE):
            labels = [STUDY_SINGLE[i]]
        elif i >= 120:
            labels = ["Practice Not Covered"]
        else:
            labels = sorted(rng.sample(eligible, rng.choice([1, 1, 2])), key=level1.index)
            if rng.random() < 0.1:
                labels.append("Practice Not Covered")
        segs.append({
            "id": f"study-{i + 1:03d}",
            "doc_id": f"study-doc-{doc:02d}",
            "lang": "en",
            "text": opp_text(labels, company, i + 1, rng),
            "labels": labels,
            "split": "test",
        })
    write_jsonl(FIX / "corpora" / "opp115_study.jsonl", segs)

    rules = []
    for s in segs:
        cats = [l for l in s["labels"] if l != "Practice Not Covered"]
        if not cats:
            continue
        parts = []
        for c in cats:
            parts.append(f"{c}: this category concerns the practice its definition names. "
                         f"Relevance: the segment ({s['id']}) states such a practice explicitly.")
        rules.append({"match": {"purpose": "explain", "segment": s["id"]}, "reply": "\n".join(parts)})
    write_yaml(FIX / "stub" / "study_explain.script", {"rules": rules},
               "Scripted explanation replies for the explainability study fixture.")

    decoys, weakness = [], {}
    for i, (cat, why, text) in enumerate(DECOYS):
        seg = segs[i]
        assert seg["labels"] == [cat]
        decoys.append({"segment_id": seg["id"], "categories": [cat], "text": text})
        weakness[seg["id"]] = why
    write_jsonl(FIX / "study" / "decoys.jsonl", decoys)
    write_yaml(FIX / "study" / "decoys.private.yaml", {"weakness": weakness},
               "Private: intended weakness of each authored decoy. Never shown to annotators.")
    write_json(FIX / "corpora" / "opp115_study.manifest.json", {
        "segments": len(segs),
        "eligible": sum(1 for s in segs if any(l != "Practice Not Covered" for l in s["labels"])),
    })


# ---------------------------------------------------------------------------
GOPPC_SENTENCES = {
    "DATA CONTROLLER": "{c} Ltd is the controller responsible for your personal data.",
    "DATA PROTECTION OFFICER": "You can reach the {c} data protection officer at dpo@{d}.example.",
    "DATA COLLECTION": "{c} gathers information about how you use the service.",
    "SOURCE": "Some data about you is received by {c} from public registers and partners.",
    "DATA TYPE": "{c} processes your name, postal address and phone number.",
    "PROCESSING PURPOSE": "{c} processes data to deliver and personalise the service.",
    "LEGAL BASIS": "{c} relies on a lawful ground for each processing activity.",
    "CONSENT": "Where you have agreed, {c} sends marketing messages on the basis of that agreement.",
    "CONTRACT": "{c} needs your address to fulfil the order you placed with us.",
    "LEGAL OBLIGATION": "{c} keeps invoices because tax law requires it.",
    "LEGITIMATE INTEREST": "{c} analyses usage to protect its business interests.",
    "DATA SHARING": "{c} discloses personal data to other organisations.",
    "RECIPIENT": "Payment processors and couriers receive data from {c}.",
    "CONDITION": "{c} only discloses data when required by a court order or with your permission.",
    "SHARING PURPOSE": "{c} passes data to partners so that they can deliver your parcel.",
    "INTERNATIONAL TRANSFER": "Your data may be processed by {c} outside the European Economic Area.",
    "DESTINATION": "{c} stores backups in the United States and Singapore.",
    "SAFEGUARD": "{c} uses standard contractual clauses for transfers abroad.",
    "DATA RETENTION": "{c} does not keep personal data longer than needed.",
    "PERIOD": "{c} deletes account data two years after your last login.",
    "CRITERIA": "Retention at {c} depends on legal limitation periods.",
    "DATA SUBJECT RIGHTS": "Under the GDPR you have rights over your data held by {c}.",
    "ACCESS": "You may request a copy of the data {c} holds about you.",
    "RECTIFICATION": "Ask {c} to correct inaccurate details.",
    "ERASURE": "You can ask {c} to erase your personal data.",
    "RESTRICTION": "You may ask {c} to restrict processing while a dispute is resolved.",
    "PORTABILITY": "{c} will export your data in a machine-readable format on request.",
    "OBJECTION": "You can object to direct marketing by {c} at any time.",
    "WITHDRAW CONSENT": "You may withdraw your consent to {c} whenever you wish.",
    "DATA SECURITY": "{c} protects your data with appropriate safeguards.",
    "MEASURE": "{c} encrypts databases and uses two-factor authentication for staff.",
    "AUTOMATED DECISION MAKING": "{c} does not make decisions about you solely by automated means.",
    "CHILDREN": "The {c} service is not directed to children under 16.",
    "POLICY CHANGE": "{c} will announce changes to this notice on this page.",
    "COMPLAINT": "You have the right to complain to your local supervisory authority about {c}.",
}


def render_path(p):
    return ".".join(p)


def goppc_text(paths, company, idx):
    used, parts = set(), []
    for p in paths:
        for name in p:
            if name not in used and name != "OTHER":
                used.add(name)
                parts.append(GOPPC_SENTENCES[name].format(c=company, d=company.split()[0].lower()))
    if not parts:
        parts.append(f"{company} thanks you for choosing our products.")
    parts.append(f"(Clause {idx}.)")
    return " ".join(parts)


def gen_goppc150():
    level1, children = load_taxonomy("goppc150")
    rng = random.Random(150)

    # Each segment: gold paths + a scripted behavior.
    # behavior = {"l1": reply text, "l1_recognized": [...], "l1_unknown": [...], "l1_other": bool,
    #             "reask": optional reply, "l2": {parent: (reply, recognized, unknown, other)}}
    segments = []

    def seg(gold, l1_reply, l1_rec, l2=None, l1_unknown=(), l1_other=False, reask=None):
        segments.append({"gold": gold, "l1_reply": l1_reply, "l1_rec": list(l1_rec),
                         "l1_unknown": list(l1_unknown), "l1_other": l1_other,
                         "reask": reask, "l2": l2 or {}})

    # Hand-authored cases.
    seg([["DATA SHARING", "CONDITION"]], "DATA SHARING", ["DATA SHARING"],
        {"DATA SHARING": ("CONDITION", ["CONDITION"], [], False)})
    seg([["OTHER"]], "OTHER", [], l1_other=True)
    seg([["POLICY CHANGE"], ["DATA SUBJECT RIGHTS", "ACCESS"], ["DATA SUBJECT RIGHTS", "ERASURE"]],
        "POLICY CHANGE; DATA SUBJECT RIGHTS", ["DATA SUBJECT RIGHTS", "POLICY CHANGE"],
        {"DATA SUBJECT RIGHTS": ("ACCESS; ERASURE", ["ACCESS", "ERASURE"], [], False)})
    seg([["DATA RETENTION"]], "DATA RETENTION", ["DATA RETENTION"],
        {"DATA RETENTION": ("OTHER", [], [], True)})
    seg([["DATA SHARING", "RECIPIENT"], ["INTERNATIONAL TRANSFER", "CONDITION"]],
        "Let me reason step by step.\nThe segment names recipients and a transfer outside the EEA.\n"
        "Answer: DATA SHARING; INTERNATIONAL TRANSFER",
        ["DATA SHARING", "INTERNATIONAL TRANSFER"],
        {"DATA SHARING": ("RECIPIENT", ["RECIPIENT"], [], False),
         "INTERNATIONAL TRANSFER": ("CONDITION", ["CONDITION"], [], False)})
    seg([["CHILDREN"]], "I am not able to decide from this text.", ["CHILDREN"], reask="CHILDREN")
    seg([["DATA SECURITY", "MEASURE"]], "DATA SALE; DATA SECURITY", ["DATA SECURITY"],
        {"DATA SECURITY": ("MEASURE", ["MEASURE"], [], False)}, l1_unknown=["DATA SALE"])
    seg([["DATA SHARING", "CONDITION"]], "  data sharing ", ["DATA SHARING"],
        {"DATA SHARING": ("condition", ["CONDITION"], [], False)})
    seg([["LEGAL BASIS", "CONSENT"]], "LEGAL BASIS", ["LEGAL BASIS"],
        {"LEGAL BASIS": ("CONSENT; DATA SECURITY", ["CONSENT"], ["DATA SECURITY"], False)})
    seg([["COMPLAINT"], ["DATA CONTROLLER"]], "DATA CONTROLLER, COMPLAINT",
        ["DATA CONTROLLER", "COMPLAINT"])

    # Generated cases.
    def gold_paths():
        heads = rng.sample(level1, rng.choice([1, 1, 2]))
        paths = []
        for h in sorted(heads, key=level1.index):
            kids = children.get(h, [])
            if kids and rng.random() < 0.8:
                for k in rng.sample(kids, rng.choice([1, 1, 2]) if len(kids) > 1 else 1):
                    paths.append([h, k])
            else:
                paths.append([h])
        return paths

    while len(segments) < 60:
        if rng.random() < 0.08:
            seg([["OTHER"]], "OTHER", [], l1_other=True)
            continue
        gold = gold_paths()
        heads = []
        for p in gold:
            if p[0] not in heads:
                heads.append(p[0])
        pred_heads = list(heads)
        if rng.random() < 0.2:
            extra = rng.choice(level1)
            if extra not in pred_heads:
                pred_heads.append(extra)
        if len(pred_heads) > 1 and rng.random() < 0.15:
            pred_heads.pop(rng.randrange(len(pred_heads)))
        l1_rec = sorted(pred_heads, key=level1.index)
        l2 = {}
        for h in l1_rec:
            kids = children.get(h, [])
            if not kids:
                continue
            gold_kids = [p[1] for p in gold if p[0] == h and len(p) > 1]
            pk = list(gold_kids)
            r = rng.random()
            if r < 0.15 or not pk:
                if rng.random() < 0.5:
                    l2[h] = ("OTHER", [], [], True)
                    continue
                pk = [rng.choice(kids)]
            elif r < 0.3:
                alt = rng.choice(kids)
                if alt not in pk:
                    pk.append(alt)
            pk = [k for k in kids if k in pk]
            l2[h] = ("; ".join(pk), pk, [], False)
        seg(gold, "; ".join(pred_heads), l1_rec, l2)

    records, rules, expected = [], [], {}
    for i, s in enumerate(segments):
        sid = f"gp-{i + 1:03d}"
        doc = i // 5
        company = COMPANIES[doc]
        split = "train" if doc < 8 else ("val" if doc < 10 else "test")
        records.append({
            "id": sid, "doc_id": f"gp-doc-{doc:02d}", "lang": "en",
            "text": goppc_text(s["gold"], company, i + 1),
            "labels": [render_path(p) for p in s["gold"]],
            "split": split,
        })
        if s["reask"] is not None:
            rules.append({"match": {"segment": sid, "level": 1, "round": 1}, "reply": s["reask"]})
        rules.append({"match": {"segment": sid, "level": 1}, "reply": s["l1_reply"]})
        for parent, (reply, *_rest) in s["l2"].items():
            rules.append({"match": {"segment": sid, "level": 2, "parent": parent}, "reply": reply})

        # Oracle: hand-walk of the behavior.
        calls = 1 + (1 if s["reask"] is not None else 0)
        unknown = list(s["l1_unknown"])
        if s["l1_other"]:
            predicted = ["OTHER"]
        else:
            predicted = []
            for h in s["l1_rec"]:
                if not children.get(h):
                    predicted.append(h)
                    continue
                calls += 1
                reply, rec, unk, other = s["l2"][h]
                unknown += unk
                if other:
                    predicted.append(h)
                else:
                    predicted += [f"{h}.{k}" for k in rec]
        expected[sid] = {"predicted": sorted(predicted), "calls": calls, "unknown": unknown}

    write_jsonl(FIX / "corpora" / "goppc150.jsonl", records)
    write_yaml(FIX / "stub" / "goppc150_cascade.script", {"rules": rules},
               "Scripted two-level replies for the GoPPC-150 cascade fixture.")
    # Second failure hits a level-2 call, so partial exchanges must survive.
    l2_fail = next(f"gp-{i + 1:03d}" for i, s in enumerate(segments) if i >= 40 and s["l2"])
    failing = ["gp-020", l2_fail]
    fail_rules = [
        {"match": {"segment": failing[0], "level": 1}, "fail": {"status": 503}},
        {"match": {"segment": failing[1], "level": 2}, "fail": {"status": 502}},
    ]
    write_yaml(FIX / "stub" / "goppc150_failures.script", {"rules": fail_rules + rules},
               "Cascade fixture with two segments whose gateway calls always fail.")

    # Instruction-record counts per split and level (two-level export oracle).
    export_counts = {}
    for split in ("train", "val", "test"):
        l1 = l2 = 0
        for r in records:
            if r["split"] != split:
                continue
            l1 += 1
            heads_with_child = {lab.split(".")[0] for lab in r["labels"] if "." in lab}
            l2 += len(heads_with_child)
        export_counts[split] = {"1": l1, "2": l2}

    freq1, freq2 = Counter(), Counter()
    for r in records:
        freq1.update({lab.split(".")[0] for lab in r["labels"]})
        freq2.update({lab.split(".")[1] for lab in r["labels"] if "." in lab})
    write_json(FIX / "corpora" / "goppc150.manifest.json", {
        "segments": len(records),
        "split_sizes": dict(Counter(r["split"] for r in records)),
        "label_frequencies": {"1": dict(sorted(freq1.items())), "2": dict(sorted(freq2.items()))},
        "export_counts": export_counts,
        "cascade_expected": expected,
        "failing_segments": failing,
    })


# ---------------------------------------------------------------------------
OPP_BANK = {
    "First Party Collection/Use": [
        "When you sign up we ask for your name and email so we can manage your account.",
        "We use your browsing activity on our site to suggest articles you may like.",
    ],
    "Third Party Sharing/Collection": [
        "We share device identifiers with our advertising partners.",
        "Social media plug-ins on our pages let those networks collect information about your visit.",
    ],
    "User Choice/Control": [
        "You can unsubscribe from our newsletter using the link in every message.",
        "You may turn off personalized ads in your account preferences.",
    ],
    "User Access, Edit and Deletion": [
        "You can update your contact details at any time from your profile page.",
        "Send us a request and we will delete the information associated with your account.",
    ],
    "Data Retention": [
        "We keep order records for five years for accounting purposes.",
        "Inactive accounts are removed after twenty-four months.",
    ],
    "Data Security": [
        "All card numbers are encrypted before they are stored.",
        "Only employees who need the information to do their jobs can access it.",
    ],
    "Policy Change": [
        "If we change this policy we will post the revised version with a new effective date.",
        "We will email registered users before any significant change takes effect.",
    ],
    "Do Not Track": [
        "Our website does not change its behavior when it receives a Do Not Track signal.",
        "We honor browser Do Not Track settings for advertising cookies.",
    ],
    "International and Specific Audiences": [
        "Our service is not intended for children under the age of thirteen.",
        "Residents of the European Union may have additional rights described below.",
    ],
    "Introductory/Generic": [
        "This notice explains our commitment to your privacy.",
        "Thank you for visiting our website. Please read the following carefully.",
    ],
    "Privacy Contact Information": [
        "If you have questions about this policy, write to our privacy team.",
        "You can call our privacy hotline during business hours.",
    ],
    "Practice Not Covered": [
        "Our stores are open every day except public holidays.",
        "Prize draws are subject to separate terms and conditions.",
    ],
}


def gen_banks():
    write_yaml(FIX / "banks" / "opp115.bank",
               {"name": "opp115",
                "exemplars": {k: [{"text": t, "labels": [k]} for t in v] for k, v in OPP_BANK.items()}},
               "Hand-authored paraphrase exemplars for OPP-115 few-shot prompts.")
    ex = {}
    for name, sentence in GOPPC_SENTENCES.items():
        a = sentence.format(c="Example Corp", d="example")
        b = sentence.format(c="Sample Services", d="sample")
        ex[name] = [{"text": a, "labels": [name]}, {"text": b, "labels": [name]}]
    write_yaml(FIX / "banks" / "goppc150.bank", {"name": "goppc150", "exemplars": ex},
               "Hand-authored paraphrase exemplars for GoPPC-150 few-shot prompts.")


def gen_plans():
    common = {
        "corpus": "fixtures/corpora/opp115.jsonl",
        "taxonomy": "taxonomies/opp115.taxonomy",
        "bank": "fixtures/banks/opp115.bank",
        "split": "all",
        "endpoint": "http://localhost:8000/v1",
        "model": "llama3-8b-instruct",
        "max_depth": 1,
        "seed": 7,
    }
    write_yaml(FIX / "plans" / "opp115_prompts.plan",
               {"name": "opp115-prompts", **common, "kinds": KINDS,
                "configs": [{"name": "T=0.6", "temperature": 0.6, "top_p": 0.9, "top_k": 50}]},
               "Five prompt kinds under the default sampling configuration.")
    write_yaml(FIX / "plans" / "opp115_temperature.plan",
               {"name": "opp115-temperature", **common, "kinds": ["ONE_SHOT"],
                "configs": [{"name": "Greedy", "greedy": True},
                            {"name": "T=0.3", "temperature": 0.3, "top_p": 0.9, "top_k": 50},
                            {"name": "T=0.6", "temperature": 0.6, "top_p": 0.9, "top_k": 50},
                            {"name": "T=0.9", "temperature": 0.9, "top_p": 0.9, "top_k": 50}]},
               "One prompt kind across greedy decoding and three temperatures.")


if __name__ == "__main__":
    gen_opp115()
    gen_study()
    gen_goppc150()
    gen_banks()
    gen_plans()
    print("fixtures written under", FIX)
