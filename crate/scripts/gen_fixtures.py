#!/usr/bin/env python3
"""Regenerates the bundled fixtures under crates/core/fixtures.

The academic graph is drawn from a fixed-seed RNG; the manifest is produced by
a separate counting pass that re-reads the written document.
"""
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"

FIRST = ["Alice", "Bruno", "Chen", "Dana", "Elif", "Farid", "Grace", "Hiro", "Ines", "Jonas",
         "Kavya", "Liam", "Mei", "Nadia", "Omar", "Priya", "Quinn", "Rosa", "Sven", "Tara"]
LAST = ["Adler", "Berg", "Costa", "Dutta", "Evans", "Fischer", "Garcia"]
CONCEPTS = ["graph drawing", "knowledge graphs", "visual analytics", "edge bundling", "clustering",
            "dimensionality reduction", "user study", "ontology", "force layout", "large language models",
            "provenance", "sensemaking", "network analysis", "uncertainty", "text mining",
            "storytelling", "evaluation", "scalability", "interaction design", "color perception"]
TITLE_A = ["Scalable", "Interactive", "Ontology-Aware", "Progressive", "Explainable", "Context-Driven",
           "Hierarchical", "Adaptive"]
TITLE_B = ["Graph Layout", "Knowledge Exploration", "Cluster Views", "Edge Bundles", "Network Summaries",
           "Query Interfaces", "Semantic Maps", "Path Analysis"]
VENUES = ["TVCG", "VIS", "EuroVis", "PacificVis"]
AFFILS = ["Ohio State", "TU Wien", "Inria", "KAIST", "Utah", "Konstanz"]
FIELDS = ["visualization", "data mining", "hci", "machine learning"]


def academic():
    rng = random.Random(7)
    years = [2014] * 5 + [2015] * 6 + [2016] * 7 + [2017] * 6 + [2018] * 9 + [2019] * 7
    rng.shuffle(years)
    nodes, edges = [], []
    names = [f"{f} {l}" for l in LAST for f in FIRST]
    rng.shuffle(names)
    for i in range(40):
        title = f"{rng.choice(TITLE_A)} {rng.choice(TITLE_B)} {i + 1}"
        nodes.append({"id": f"P{i + 1:02d}", "type": "Paper", "label": title,
                      "attributes": {"year": years[i], "title": title, "venue": rng.choice(VENUES),
                                     "citations": rng.randint(0, 250)}})
    for i in range(60):
        nodes.append({"id": f"A{i + 1:02d}", "type": "Author", "label": names[i],
                      "attributes": {"affiliation": rng.choice(AFFILS), "h_index": rng.randint(3, 60)}})
    for i, c in enumerate(CONCEPTS):
        nodes.append({"id": f"C{i + 1:02d}", "type": "Concept", "label": c,
                      "attributes": {"field": FIELDS[i % len(FIELDS)]}})
    eid = 0

    def edge(s, t, rel, attrs=None):
        nonlocal eid
        eid += 1
        edges.append({"id": f"E{eid:04d}", "source": s, "target": t, "relation": rel,
                      "attributes": attrs or {}})

    authors = [f"A{i + 1:02d}" for i in range(60)]
    # every author writes at least one paper; the rest are drawn at random
    pool = authors[:]
    rng.shuffle(pool)
    for p in range(40):
        k = rng.randint(2, 4)
        team = []
        while pool and len(team) < min(k, 2):
            team.append(pool.pop())
        while len(team) < k:
            a = rng.choice(authors)
            if a not in team:
                team.append(a)
        for pos, a in enumerate(team):
            edge(f"P{p + 1:02d}", a, "writtenBy", {"first_author": "true" if pos == 0 else "false"})
    for a in pool:
        edge(f"P{rng.randint(1, 40):02d}", a, "writtenBy", {"first_author": "false"})
    for p in range(40):
        for c in rng.sample(range(20), rng.randint(1, 3)):
            edge(f"P{p + 1:02d}", f"C{c + 1:02d}", "hasConcept")
    for _ in range(30):
        a, b = rng.sample(range(40), 2)
        edge(f"P{a + 1:02d}", f"P{b + 1:02d}", "cites")
    return {"meta": {"name": "academic", "attribute_kinds": {"Paper": {"year": "numeric"}}},
            "nodes": nodes, "edges": edges}


def manifest(path):
    doc = json.loads(path.read_text())
    types, relations = {}, set()
    type_of = {}
    for n in doc["nodes"]:
        types[n["type"]] = types.get(n["type"], 0) + 1
        type_of[n["id"]] = n["type"]
    for e in doc["edges"]:
        relations.add((type_of[e["source"]], type_of[e["target"]], e["relation"]))
    return {"node_count": len(doc["nodes"]), "edge_count": len(doc["edges"]),
            "type_counts": dict(sorted(types.items())),
            "relations": sorted(list(r) for r in relations)}


ONTOLOGIES = {
    "conference": {
        "types": ["Author", "Conference", "Paper"],
        "relations": [["Conference", "Paper", "hasPaper"], ["Author", "Conference", "presentedAt"],
                      ["Paper", "Author", "writtenBy"]],
        "attributes": {"Conference": {"Tier": "text", "field": "text", "year": "numeric"},
                       "Paper": {"year": "numeric", "title": "text"},
                       "Author": {"affiliation": "text"}},
    },
    "movie": {
        "types": ["Actor", "Director", "Movie"],
        "relations": [["Actor", "Movie", "actedIn"], ["Actor", "Director", "workedWith"],
                      ["Director", "Movie", "directed"]],
        "attributes": {"Actor": {"Age": "numeric", "nationality": "text"},
                       "Movie": {"year": "numeric", "genre": "text"},
                       "Director": {"Age": "numeric", "nationality": "text"}},
    },
    "social": {
        "types": ["Friend", "Group", "User"],
        "relations": [["User", "Friend", "friendOf"], ["User", "Group", "memberOf"]],
        "attributes": {"User": {"Joined year": "numeric", "country": "text"},
                       "Friend": {"country": "text"},
                       "Group": {"category": "text", "size": "numeric"}},
    },
    "ecommerce": {
        "types": ["Customer", "Order", "Product"],
        "relations": [["Order", "Customer", "placedBy"], ["Order", "Product", "contains"]],
        "attributes": {"Order": {"Product Brand": "text", "status": "text", "total": "numeric"},
                       "Customer": {"city": "text", "segment": "text"},
                       "Product": {"category": "text", "price": "numeric"}},
    },
}

# (ontology, question, interest, attribute, value, connected)
CORPUS = [
    ("academic", "Find papers published in 2018 and their authors", "Paper", "year", "2018", ["Author"]),
    ("academic", "Find papers published in 2016 and their authors and concepts", "Paper", "year", "2016", ["Author", "Concept"]),
    ("academic", "Show papers published in 2014, their authors", "Paper", "year", "2014", ["Author"]),
    ("academic", "List papers published in 2019 and their concepts", "Paper", "year", "2019", ["Concept"]),
    ("academic", "Show papers with year 2017 and their authors", "Paper", "year", "2017", ["Author"]),
    ("academic", "Find papers with venue TVCG and their authors and concepts", "Paper", "venue", "TVCG", ["Author", "Concept"]),
    ("academic", "Show papers whose venue is EuroVis, their concepts", "Paper", "venue", "EuroVis", ["Concept"]),
    ("academic", "Find papers with citations 1,200 and their authors", "Paper", "citations", "1200", ["Author"]),
    ("academic", "Show authors with affiliation Ohio State and their papers", "Author", "affiliation", "Ohio State", ["Paper"]),
    ("academic", "List authors whose affiliation is TU Wien, their papers", "Author", "affiliation", "TU Wien", ["Paper"]),
    ("academic", "Find authors above h index 40 and their papers", "Author", "h_index", "40", ["Paper"]),
    ("academic", "Show concepts with field visualization and their papers", "Concept", "field", "visualization", ["Paper"]),
    ("academic", "Find concepts whose field is data mining and their papers", "Concept", "field", "data mining", ["Paper"]),
    ("academic", "Show papers published in 2015 and their concepts and authors", "Paper", "year", "2015", ["Concept", "Author"]),
    ("conference", "Show Tier A conferences in computer science, their papers and authors", "Conference", "Tier", "Tier A", ["Paper", "Author"]),
    ("conference", "Find Tier B conferences and their papers", "Conference", "Tier", "Tier B", ["Paper"]),
    ("conference", "Show conferences with field databases, their papers", "Conference", "field", "databases", ["Paper"]),
    ("conference", "List conferences held in 2020 and their authors", "Conference", "year", "2020", ["Author"]),
    ("conference", "Find papers published in 2012 and their conferences and authors", "Paper", "year", "2012", ["Conference", "Author"]),
    ("conference", "Show authors whose affiliation is ETH Zurich and their conferences", "Author", "affiliation", "ETH Zurich", ["Conference"]),
    ("conference", "Show conferences with Tier A* and their papers", "Conference", "Tier", "Tier A*", ["Paper"]),
    ("conference", "Find papers with title Graph Drawing Revisited and their authors", "Paper", "title", "Graph Drawing Revisited", ["Author"]),
    ("movie", "Show actors above age 40, their released movies and the movie directors", "Actor", "Age", "40", ["Movie", "Director"]),
    ("movie", "Find actors with nationality French and their movies", "Actor", "nationality", "French", ["Movie"]),
    ("movie", "Show movies released in 1999 and their actors and directors", "Movie", "year", "1999", ["Actor", "Director"]),
    ("movie", "List movies whose genre is science fiction, their directors", "Movie", "genre", "science fiction", ["Director"]),
    ("movie", "Find directors above age 60 and their movies", "Director", "Age", "60", ["Movie"]),
    ("movie", "Show directors with nationality Korean, their movies and actors", "Director", "nationality", "Korean", ["Movie", "Actor"]),
    ("movie", "Find movies with genre drama and their actors", "Movie", "genre", "drama", ["Actor"]),
    ("movie", "Show actors below age 30 and their directors", "Actor", "Age", "30", ["Director"]),
    ("social", "Find users who joined in 2021, their friends and the groups they belong to", "User", "Joined year", "2021", ["Friend", "Group"]),
    ("social", "Show users with country Brazil and their groups", "User", "country", "Brazil", ["Group"]),
    ("social", "List groups whose category is hiking, their users", "Group", "category", "hiking", ["User"]),
    ("social", "Find groups above size 1,000 and their users", "Group", "size", "1000", ["User"]),
    ("social", "Show users who joined in 2019 and their friends", "User", "Joined year", "2019", ["Friend"]),
    ("social", "Find friends with country Japan and their users", "Friend", "country", "Japan", ["User"]),
    ("ecommerce", "Which orders were placed for handbags from Brand X, and who were their customers?", "Order", "Product Brand", "Brand X", ["Customer"]),
    ("ecommerce", "Show orders with status shipped and their customers and products", "Order", "status", "shipped", ["Customer", "Product"]),
    ("ecommerce", "Find customers whose city is New York, their orders", "Customer", "city", "New York", ["Order"]),
    ("ecommerce", "List products with category shoes and their orders", "Product", "category", "shoes", ["Order"]),
]


def completion(i, interest, attribute, value, connected):
    # recorded completions vary surface forms the way a model does
    if i % 5 == 1:
        interest = interest.lower()
    if i % 7 == 3:
        connected = [c.lower() + "s" for c in connected]
    return json.dumps({"interest_type": interest, "attribute": attribute,
                       "attribute_value": value, "connected_types": connected})


FAKE_WORDS = ["Quantum", "Holographic", "Telepathic", "Nebula", "Chrono", "Sonic", "Lunar", "Crystal"]
FAKE_NOUNS = ["Sorcery", "Weaving", "Alchemy", "Cartomancy", "Divination", "Topiary"]


def invented(rng, existing):
    """A paper-like title that is not a label of the graph."""
    while True:
        name = f"{rng.choice(FAKE_WORDS)} Graph {rng.choice(FAKE_NOUNS)} {rng.randrange(100, 1000)}"
        if name not in existing:
            return name


def insight_suite(graph):
    """50 questions on the academic graph with recorded insight completions.

    Completions quote labels of nodes that the question retrieves; every
    other completion also quotes a name that does not exist in the graph,
    which the guardrail has to strip.
    """
    rng = random.Random(11)
    label = {n["id"]: n["label"] for n in graph["nodes"]}
    papers = [n for n in graph["nodes"] if n["type"] == "Paper"]
    linked = {}
    for e in graph["edges"]:
        linked.setdefault(e["source"], []).append(e["target"])
        linked.setdefault(e["target"], []).append(e["source"])
    questions = []
    for year in range(2014, 2020):
        questions.append((f"Find papers published in {year} and their authors", "year", year, "A"))
        questions.append((f"List papers published in {year} and their concepts", "year", year, "C"))
        questions.append((f"Show papers published in {year} and their authors and concepts", "year", year, "AC"))
    for venue in VENUES:
        questions.append((f"Find papers with venue {venue} and their authors", "venue", venue, "A"))
        questions.append((f"Show papers whose venue is {venue}, their concepts", "venue", venue, "C"))
        questions.append((f"Find papers with venue {venue} and their authors and concepts", "venue", venue, "AC"))
    # the first twenty questions again at the diversity extremes
    runs = [(q, 0.5) for q in questions] + [(q, float(i % 2)) for i, q in enumerate(questions[:20])]
    suite = []
    for (q, attr, value, kinds), sigma in runs:
        hits = [p for p in papers if p["attributes"][attr] == value]
        paper = rng.choice(hits)
        others = [t for t in linked[paper["id"]] if t[0] in kinds]
        other = rng.choice(others) if others else None
        bullets = [f'- "{paper["label"]}" is one of the {len(hits)} papers matching {value}.']
        if other:
            bullets.append(f'- "{label[other]}" is linked to "{paper["label"]}".')
        bullets.append("- Most clusters have similar sizes.")
        bullets.append("- Degrees are low overall, with a few hubs.")
        if len(suite) % 2 == 0:
            bullets.append(f'- "{invented(rng, set(label.values()))}" bridges the largest clusters.')
        suite.append({"question": q, "diversity": sigma, "completion": "\n".join(bullets)})
    return suite


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / "academic.json"
    path.write_text(json.dumps(academic(), indent=1) + "\n")
    (OUT / "academic.manifest.json").write_text(json.dumps(manifest(path), indent=1) + "\n")
    (OUT / "ontologies.json").write_text(json.dumps(ONTOLOGIES, indent=1) + "\n")
    corpus = []
    for i, (onto, q, it, at, v, ct) in enumerate(CORPUS):
        corpus.append({"ontology": onto, "question": q,
                       "expected": {"interest_type": it, "attribute": at, "attribute_value": v,
                                    "connected_types": ct},
                       "completion": completion(i, it, at, v, ct)})
    assert len(corpus) == 40
    (OUT / "preference_corpus.json").write_text(json.dumps(corpus, indent=1) + "\n")
    suite = insight_suite(json.loads(path.read_text()))
    assert len(suite) == 50
    (OUT / "insight_suite.json").write_text(json.dumps(suite, indent=1) + "\n")


if __name__ == "__main__":
    main()
