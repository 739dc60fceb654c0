"""Builder for the bundled benchmark: 10 authored tasks (4 Easy, 4 Medium,
2 Hard) over generated snapshots, plus the scripted-provider fixtures for
the camera research scenario. `build_benchmark(out_dir)` writes the whole
tree:

    manifest.json
    snapshots/*.html
    tasks/*.json
    fixtures/camera-scenario.json
    labels-example.json
"""

from __future__ import annotations

import json
from pathlib import Path

from ..instances import canonical_json
from .pages import ListingPage, generate_listing

SHARED_CAMERA_TITLES = ["Canon PowerShot 450", "Sony Alpha 230", "Nikon Z fc 610"]
SHARED_MONITOR_TITLES = ["Dell UltraSharp 27", "LG UltraGear 32",
                         "Samsung Odyssey 28", "BenQ Mobiuz 25"]

AMAZON_URL = "https://amazon.shop.test/cameras"
EBAY_URL = "https://ebay.shop.test/cameras"


def _capture(url: str, table_id: str, item: int, col: int, field: str) -> dict:
    return {"do": "capture-into", "url": url,
            "locator": {"item": item, "field": field},
            "instance": table_id, "row": item, "col": col}


def extraction_script(url: str, file: str, table_id: str,
                      fields: list[tuple[str, str, str]]) -> list[dict]:
    """Standard flow: ingest, make a table, capture two exemplar items,
    accept the batch completion until the table is full.

    `fields` rows are (column name, declared type, page field class).
    """
    script = [
        {"do": "ingest", "file": file, "url": url},
        {"do": "create-table", "id": table_id,
         "columns": [{"name": name, "type": dtype} for name, dtype, _ in fields]},
        {"do": "focus", "view": "table-editor", "instance": table_id},
    ]
    for item in (0, 1):
        for col, (_, _, field) in enumerate(fields):
            script.append(_capture(url, table_id, item, col, field))
    script.append({"do": "accept-insitu", "trigger": "batch-extraction",
                   "repeat": True})
    return script


def _tool(tool: str, args: dict, event: dict | None = None) -> dict:
    action = {"do": "apply-tool", "tool": tool, "args": args}
    if event is not None:
        action["event"] = event
    return action


def _pages() -> dict[str, ListingPage]:
    return {
        "amazon-cameras": generate_listing(
            101, 20, "cameras", url=AMAZON_URL, price_style="usd-symbol",
            shared_titles=SHARED_CAMERA_TITLES),
        "ebay-cameras": generate_listing(
            202, 18, "cameras", url=EBAY_URL, price_style="hkd",
            shared_titles=SHARED_CAMERA_TITLES),
        "cameras-easy": generate_listing(
            303, 14, "cameras", url="https://shop.test/cameras-easy"),
        "movies": generate_listing(
            404, 16, "movies", url="https://reviews.test/movies"),
        "teams": generate_listing(
            505, 12, "teams", url="https://sports.test/standings"),
        "stocks": generate_listing(
            606, 15, "stocks", url="https://finance.test/stocks"),
        "stocks-dirty": generate_listing(
            707, 18, "stocks", url="https://finance.test/stocks-dirty",
            sponsored_rows=(4, 9), na_price_rows=(5, 8, 12)),
        "monitors-a": generate_listing(
            808, 13, "monitors", url="https://siteA.test/monitors",
            shared_titles=SHARED_MONITOR_TITLES),
        "monitors-b": generate_listing(
            909, 11, "monitors", url="https://siteB.test/monitors",
            price_style="code-suffix", shared_titles=SHARED_MONITOR_TITLES),
        "monitors-dirty": generate_listing(
            111, 12, "monitors", url="https://siteC.test/monitors",
            price_style="usd-spaced", missing_rating_rows=(3, 6, 9),
            shared_titles=SHARED_MONITOR_TITLES),
    }


def _enriched_table_json(table_id: str, page: ListingPage) -> dict:
    """The full five-column table a chat enrichment produces, derived from
    the page's ground truth."""
    rows = []
    for item in page.items:
        rows.append([
            {"t": "image-ref", "v": item.image},
            {"t": "text", "v": item.title},
            {"t": "text", "v": item.price},
            {"t": "number", "v": float(item.rating)},
            {"t": "text", "v": item.extra},
        ])
    return {
        "kind": "table",
        "id": table_id,
        "name": table_id,
        "columns": [
            {"name": "Image", "type": "image-ref"},
            {"name": "Product Title", "type": "text"},
            {"name": "Price", "type": "text"},
            {"name": "User Rating", "type": "number"},
            {"name": "Resolution", "type": "text"},
        ],
        "rows": rows,
        "lineage": [],
    }


def _plan_response(prose: str, steps: list[dict]) -> str:
    return prose + "\n```json\n" + json.dumps(steps) + "\n```"


def scenario_fixtures(pages: dict[str, ListingPage]) -> dict:
    """Scripted-provider fixtures for the camera scenario, keyed by intent."""
    amazon = pages["amazon-cameras"]
    ebay = pages["ebay-cameras"]
    by_intent = {
        "webpage-suggestion": {
            "response": _plan_response(
                "Here are useful camera research pages.",
                [{"tool": "openPage",
                  "args": {"url": AMAZON_URL, "description": "Amazon cameras"}},
                 {"tool": "openPage",
                  "args": {"url": EBAY_URL, "description": "eBay cameras"}}]),
            "confidence": 0.7,
            "description": ("To help you with 'Buying a camera', here are some "
                            "useful websites for researching cameras."),
        },
        "Add columns of the user ratings and resolution to @Table1": {
            "response": _plan_response(
                "Added the user ratings and resolution columns from the page.",
                [{"tool": "updateInstance",
                  "args": {"instanceId": "Table1",
                           "newInstance": _enriched_table_json("Table1", amazon)}}]),
            "confidence": 0.9,
            "description": "Add user rating and resolution columns to Table1",
        },
        "Add columns of the user ratings and resolution to @Table2": {
            "response": _plan_response(
                "Added the user ratings and resolution columns from the page.",
                [{"tool": "updateInstance",
                  "args": {"instanceId": "Table2",
                           "newInstance": _enriched_table_json("Table2", ebay)}}]),
            "confidence": 0.9,
            "description": "Add user rating and resolution columns to Table2",
        },
        "joining-tables": {
            "response": _plan_response(
                "Combine the camera data from Amazon and eBay into a single, "
                "comprehensive table. The price formats differ, so the plan "
                "formats them first.",
                [{"tool": "formatColumn",
                  "args": {"instanceId": "Table2", "columnName": "Price",
                           "formatPattern": "currency"}},
                 {"tool": "mergeInstances",
                  "args": {"sourceInstanceIds": ["Table1", "Table2"],
                           "mergeStrategy": "union",
                           "newInstanceName": "Combined_Camera_Data"}}]),
            "confidence": 0.85,
            "description": ("Table-joining: combine the camera data from both "
                            "sources into one comprehensive table."),
        },
        "Create a visualization using @Combined_Camera_Data": {
            "response": _plan_response(
                "Created a scatterplot of price against user rating, colored "
                "by resolution.",
                [{"tool": "convertColumnType",
                  "args": {"instanceId": "Combined_Camera_Data",
                           "columnName": "Price", "targetType": "number",
                           "cleaningPattern": "\\s*[A-Z]{3}$"}},
                 {"tool": "createVisualization",
                  "args": {"sourceInstanceId": "Combined_Camera_Data",
                           "chartType": "scatter", "xAxis": "Price",
                           "yAxis": "User Rating", "colorBy": "Resolution",
                           "newInstanceName": "Visualization1"}}]),
            "confidence": 0.9,
            "description": "Create a scatterplot from the combined table",
        },
    }
    return {"by_intent": by_intent}


def camera_scenario_script() -> list[dict]:
    fields = [("Image", "image-ref", "thumb"), ("Product Title", "text", "title")]
    script = [
        {"do": "workspace-created", "title": "Buying a camera"},
        {"do": "advance", "ms": 6000},
        {"do": "tick"},
        {"do": "accept-peripheral", "trigger": "webpage-suggestion"},
        {"do": "ingest", "file": "../snapshots/amazon-cameras.html", "url": AMAZON_URL},
        {"do": "create-table", "id": "Table1",
         "columns": [{"name": n, "type": t} for n, t, _ in fields]},
        {"do": "focus", "view": "table-editor", "instance": "Table1"},
        _capture(AMAZON_URL, "Table1", 0, 0, "thumb"),
        _capture(AMAZON_URL, "Table1", 0, 1, "title"),
        _capture(AMAZON_URL, "Table1", 1, 0, "thumb"),
        _capture(AMAZON_URL, "Table1", 1, 1, "title"),
        {"do": "accept-insitu", "trigger": "batch-extraction", "repeat": True},
        {"do": "chat",
         "text": "Add columns of the user ratings and resolution to @Table1"},
        {"do": "ingest", "file": "../snapshots/ebay-cameras.html", "url": EBAY_URL},
        {"do": "create-table", "id": "Table2",
         "columns": [{"name": n, "type": t} for n, t, _ in fields]},
        {"do": "focus", "view": "table-editor", "instance": "Table2"},
        _capture(EBAY_URL, "Table2", 0, 0, "thumb"),
        _capture(EBAY_URL, "Table2", 0, 1, "title"),
        _capture(EBAY_URL, "Table2", 1, 0, "thumb"),
        _capture(EBAY_URL, "Table2", 1, 1, "title"),
        {"do": "accept-insitu", "trigger": "batch-extraction", "repeat": True},
        {"do": "chat",
         "text": "Add columns of the user ratings and resolution to @Table2"},
        {"do": "focus", "view": "canvas"},
        {"do": "advance", "ms": 6000},
        {"do": "tick"},
        {"do": "accept-peripheral", "trigger": "joining-tables"},
        {"do": "chat", "text": "Create a visualization using @Combined_Camera_Data"},
    ]
    return script


def _task_records(pages: dict[str, ListingPage]) -> list[dict]:
    movies = pages["movies"]
    filter_year = movies.items[3].extra
    two_col = [("Title", "text", "title"), ("Price", "text", "price")]
    three_col = two_col + [("Rating", "text", "rating")]

    tasks = []

    tasks.append({
        "id": "e1-cameras-sort",
        "statement": "List the cameras on the page and sort them by price.",
        "snapshots": [{"file": "../snapshots/cameras-easy.html",
                       "url": pages["cameras-easy"].url}],
        "criteria": {"multi_page": False, "transform_ops_gt_5": False,
                     "needs_viz": False},
        "driver_script": extraction_script(
            pages["cameras-easy"].url, "../snapshots/cameras-easy.html",
            "Cameras", two_col) + [
            _tool("convertColumnType",
                  {"instanceId": "Cameras", "columnName": "Price",
                   "targetType": "number"}),
            _tool("tableSort",
                  {"instanceId": "Cameras", "columnName": "Price", "order": "asc"},
                  event={"kind": "sort-applied",
                         "payload": {"instance_id": "Cameras", "column": "Price",
                                     "order": "asc"}}),
        ],
    })

    tasks.append({
        "id": "e2-movies-filter",
        "statement": f"Collect the movies and keep only those from {filter_year}.",
        "snapshots": [{"file": "../snapshots/movies.html", "url": movies.url}],
        "criteria": {"multi_page": False, "transform_ops_gt_5": False,
                     "needs_viz": False},
        "driver_script": extraction_script(
            movies.url, "../snapshots/movies.html", "Movies",
            [("Title", "text", "title"), ("Year", "text", "year")]) + [
            _tool("tableFilter",
                  {"instanceId": "Movies",
                   "conditions": [{"column": "Year", "comparator": "eq",
                                   "operand": {"t": "text", "v": filter_year}}],
                   "operator": "and"},
                  event={"kind": "filter-applied",
                         "payload": {"instance_id": "Movies",
                                     "conditions": [{"column": "Year",
                                                     "comparator": "eq",
                                                     "operand": filter_year}],
                                     "operator": "and"}}),
        ],
    })

    tasks.append({
        "id": "e3-teams-rename",
        "statement": "Extract the standings and rename the wins column.",
        "snapshots": [{"file": "../snapshots/teams.html", "url": pages["teams"].url}],
        "criteria": {"multi_page": False, "transform_ops_gt_5": False,
                     "needs_viz": False},
        "driver_script": extraction_script(
            pages["teams"].url, "../snapshots/teams.html", "Standings",
            [("Team", "text", "title"), ("W", "text", "wins")]) + [
            _tool("renameColumn",
                  {"instanceId": "Standings", "oldColumnName": "W",
                   "newColumnName": "Wins"},
                  event={"kind": "column-named",
                         "payload": {"instance_id": "Standings",
                                     "old": "W", "new": "Wins"}}),
        ],
    })

    tasks.append({
        "id": "e4-stocks-strip",
        "statement": "Extract the stock movers and strip the percent signs.",
        "snapshots": [{"file": "../snapshots/stocks.html", "url": pages["stocks"].url}],
        "criteria": {"multi_page": False, "transform_ops_gt_5": False,
                     "needs_viz": False},
        "driver_script": extraction_script(
            pages["stocks"].url, "../snapshots/stocks.html", "Stocks",
            [("Name", "text", "title"), ("Change", "text", "change")]) + [
            _tool("searchAndReplace",
                  {"instanceId": "Stocks", "searchPattern": "%",
                   "replaceWith": "", "scopeColumn": "Change"}),
        ],
    })

    tasks.append({
        "id": "m1-monitors-merge",
        "statement": "Compare monitors across two shops in one table.",
        "snapshots": [
            {"file": "../snapshots/monitors-a.html", "url": pages["monitors-a"].url},
            {"file": "../snapshots/monitors-b.html", "url": pages["monitors-b"].url}],
        "criteria": {"multi_page": True, "transform_ops_gt_5": False,
                     "needs_viz": False},
        "driver_script": (
            extraction_script(pages["monitors-a"].url, "../snapshots/monitors-a.html",
                              "ShopA", two_col) +
            extraction_script(pages["monitors-b"].url, "../snapshots/monitors-b.html",
                              "ShopB", two_col) + [
                {"do": "focus", "view": "canvas"},
                {"do": "advance", "ms": 6000},
                {"do": "tick"},
                {"do": "accept-peripheral", "trigger": "joining-tables"},
            ]),
    })

    tasks.append({
        "id": "m2-cameras-viz",
        "statement": "Chart camera prices from the listing.",
        "snapshots": [{"file": "../snapshots/cameras-easy.html",
                       "url": pages["cameras-easy"].url}],
        "criteria": {"multi_page": False, "transform_ops_gt_5": False,
                     "needs_viz": True},
        "driver_script": extraction_script(
            pages["cameras-easy"].url, "../snapshots/cameras-easy.html",
            "Cameras", two_col) + [
            _tool("convertColumnType",
                  {"instanceId": "Cameras", "columnName": "Price",
                   "targetType": "number"}),
            {"do": "focus", "view": "canvas"},
            {"do": "event", "kind": "selection-made",
             "payload": {"instance_id": "Cameras", "scope": "instance"}},
            {"do": "advance", "ms": 6000},
            {"do": "accept-peripheral", "trigger": "auto-viz"},
        ],
    })

    tasks.append({
        "id": "m3-stocks-clean",
        "statement": "Clean the messy stock listing into tidy numeric columns.",
        "snapshots": [{"file": "../snapshots/stocks-dirty.html",
                       "url": pages["stocks-dirty"].url}],
        "criteria": {"multi_page": False, "transform_ops_gt_5": True,
                     "needs_viz": False},
        "driver_script": extraction_script(
            pages["stocks-dirty"].url, "../snapshots/stocks-dirty.html",
            "Stocks", two_col) + [
            _tool("searchAndReplace",
                  {"instanceId": "Stocks", "searchPattern": "Sponsored ",
                   "replaceWith": "", "scopeColumn": "Title"}),
            _tool("convertColumnType",
                  {"instanceId": "Stocks", "columnName": "Price",
                   "targetType": "number"}),
            _tool("fillMissingValues",
                  {"instanceId": "Stocks", "columnName": "Price",
                   "strategy": "mean"}),
            _tool("addComputedColumn",
                  {"instanceId": "Stocks", "formula": "Price * 2",
                   "newColumnName": "Doubled"}),
            _tool("tableSort",
                  {"instanceId": "Stocks", "columnName": "Price", "order": "desc"},
                  event={"kind": "sort-applied",
                         "payload": {"instance_id": "Stocks", "column": "Price",
                                     "order": "desc"}}),
            _tool("positionalTransform",
                  {"instanceId": "Stocks", "op": "delete-cols", "indices": [2]}),
        ],
    })

    tasks.append({
        "id": "m4-monitors-viz",
        "statement": "Merge monitors from two shops and chart the prices.",
        "snapshots": [
            {"file": "../snapshots/monitors-a.html", "url": pages["monitors-a"].url},
            {"file": "../snapshots/monitors-b.html", "url": pages["monitors-b"].url}],
        "criteria": {"multi_page": True, "transform_ops_gt_5": False,
                     "needs_viz": True},
        "driver_script": (
            extraction_script(pages["monitors-a"].url, "../snapshots/monitors-a.html",
                              "ShopA", two_col) +
            extraction_script(pages["monitors-b"].url, "../snapshots/monitors-b.html",
                              "ShopB", two_col) + [
                _tool("mergeInstances",
                      {"sourceInstanceIds": ["ShopA", "ShopB"],
                       "mergeStrategy": "union",
                       "newInstanceName": "AllMonitors"}),
                _tool("convertColumnType",
                      {"instanceId": "AllMonitors", "columnName": "Price",
                       "targetType": "number",
                       "cleaningPattern": "\\s*[A-Z]{3}$"}),
                _tool("createVisualization",
                      {"sourceInstanceId": "AllMonitors", "chartType": "bar",
                       "xAxis": "Title", "yAxis": "Price",
                       "newInstanceName": "PriceChart"},
                      event={"kind": "viz-created",
                             "payload": {"instance_id": "PriceChart"}}),
            ]),
    })

    tasks.append({
        "id": "h1-camera-scenario",
        "statement": "Buying a camera",
        "snapshots": [
            {"file": "../snapshots/amazon-cameras.html", "url": AMAZON_URL},
            {"file": "../snapshots/ebay-cameras.html", "url": EBAY_URL}],
        "criteria": {"multi_page": True, "transform_ops_gt_5": True,
                     "needs_viz": True},
        "fixtures": "../fixtures/camera-scenario.json",
        "driver_script": camera_scenario_script(),
    })

    tasks.append({
        "id": "h2-office-monitors",
        "statement": "Pick a home-office monitor across shops within budget.",
        "snapshots": [
            {"file": "../snapshots/monitors-dirty.html",
             "url": pages["monitors-dirty"].url},
            {"file": "../snapshots/monitors-b.html", "url": pages["monitors-b"].url}],
        "criteria": {"multi_page": True, "transform_ops_gt_5": True,
                     "needs_viz": True},
        "driver_script": (
            extraction_script(pages["monitors-dirty"].url,
                              "../snapshots/monitors-dirty.html", "ShopC",
                              three_col) +
            extraction_script(pages["monitors-b"].url, "../snapshots/monitors-b.html",
                              "ShopB", three_col) + [
                _tool("formatColumn",
                      {"instanceId": "ShopC", "columnName": "Price",
                       "formatPattern": "currency"}),
                _tool("mergeInstances",
                      {"sourceInstanceIds": ["ShopC", "ShopB"],
                       "mergeStrategy": "union",
                       "newInstanceName": "Monitors"}),
                _tool("convertColumnType",
                      {"instanceId": "Monitors", "columnName": "Price",
                       "targetType": "number",
                       "cleaningPattern": "\\s*[A-Z]{3}$"}),
                _tool("convertColumnType",
                      {"instanceId": "Monitors", "columnName": "Rating",
                       "targetType": "number"}),
                _tool("fillMissingValues",
                      {"instanceId": "Monitors", "columnName": "Rating",
                       "strategy": "median"}),
                _tool("addComputedColumn",
                      {"instanceId": "Monitors", "formula": "Rating / Price",
                       "newColumnName": "Score"}),
                _tool("tableSort",
                      {"instanceId": "Monitors", "columnName": "Score",
                       "order": "desc"},
                      event={"kind": "sort-applied",
                             "payload": {"instance_id": "Monitors",
                                         "column": "Score", "order": "desc"}}),
                _tool("createVisualization",
                      {"sourceInstanceId": "Monitors", "chartType": "scatter",
                       "xAxis": "Price", "yAxis": "Rating",
                       "newInstanceName": "ValueChart"},
                      event={"kind": "viz-created",
                             "payload": {"instance_id": "ValueChart"}}),
            ]),
    })
    return tasks


def build_benchmark(out_dir: str | Path) -> Path:
    out = Path(out_dir)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    (out / "tasks").mkdir(exist_ok=True)
    (out / "fixtures").mkdir(exist_ok=True)
    pages = _pages()
    for name, page in pages.items():
        (out / "snapshots" / f"{name}.html").write_text(page.html)
    (out / "fixtures" / "camera-scenario.json").write_text(
        canonical_json(scenario_fixtures(pages)) + "\n")
    task_files = []
    for record in _task_records(pages):
        file_name = f"tasks/{record['id']}.json"
        (out / file_name).write_text(json.dumps(record, indent=2) + "\n")
        task_files.append(file_name)
    manifest = {"tasks": task_files}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    labels = {"labels": [
        {"run": "h1-camera-scenario", "item": 0,
         "labeler1": "correct", "labeler2": "correct"},
        {"run": "h1-camera-scenario", "item": 1,
         "labeler1": "correct", "labeler2": "incorrect"},
        {"run": "e1-cameras-sort", "item": 0,
         "labeler1": "not-sure", "labeler2": "correct"},
    ]}
    (out / "labels-example.json").write_text(json.dumps(labels, indent=2) + "\n")
    return out / "manifest.json"
