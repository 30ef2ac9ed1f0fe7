//! Minimal built-in triage page, served at `/` when no UI bundle is configured.

pub const INDEX_HTML: &str = r#"<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>overlap-lab triage</title>
<style>
body { font-family: sans-serif; margin: 2rem; max-width: 60rem; }
img { max-width: 32rem; max-height: 24rem; display: block; margin: 1rem 0; }
button { margin-right: .5rem; }
#side { float: right; width: 18rem; }
td { padding: 0 .5rem; }
</style>
</head>
<body>
<div id="side"><h3>Prevalence</h3><table id="prev"></table></div>
<h2>Hard images <span id="progress"></span></h2>
<div id="item">loading...</div>
<p>
<button data-c="SimilarClassConfusion">1 Similar class</button>
<button data-c="NonTargetSubject">2 Non-target subject</button>
<button data-c="InadequateRepresentation">3 Inadequate representation</button>
<button data-c="PoorQuality">4 Poor quality</button>
<button data-c="Other">5 Other</button>
</p>
<p><button id="back">&larr; back</button><button id="fwd">forward &rarr;</button></p>
<script>
const order = ["SimilarClassConfusion", "NonTargetSubject", "InadequateRepresentation", "PoorQuality", "Other"];
let queue = [], pos = 0;
const esc = s => String(s).replace(/[&<>"]/g, c => ({"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;"}[c]));
async function refresh() {
  const p = await (await fetch("/api/prevalence")).json();
  document.getElementById("progress").textContent = `(${p.annotated}/${p.hard_images} annotated)`;
  document.getElementById("prev").innerHTML = p.rows.map(r => `<tr><td>${r.error_class}</td><td>${r.count}</td><td>${r.percent.toFixed(2)}%</td></tr>`).join("");
}
function show() {
  const el = document.getElementById("item");
  if (!queue.length) { el.textContent = "no hard images"; return; }
  const it = queue[pos];
  const members = it.members.map(m => `<li>${esc(m.method_id)}: ` + m.top3.map(t => `${esc(t.name)} ${(100 * t.prob).toFixed(1)}%`).join(", ") + "</li>").join("");
  const done = it.annotation ? ` &middot; annotated: ${it.annotation.error_class}` : "";
  el.innerHTML = `<b>${esc(it.image_id)}</b> (${pos + 1}/${queue.length}) truth: <b>${esc(it.truth.name)}</b>${done}` +
    `<img src="/api/image/${encodeURIComponent(it.image_id)}" alt=""><ul>${members}</ul>`;
}
async function load() {
  queue = await (await fetch("/api/queue?group=hard")).json();
  pos = 0; show(); refresh();
}
async function annotate(cls) {
  const it = queue[pos];
  const r = await fetch("/api/annotation", {method: "POST", headers: {"content-type": "application/json"},
    body: JSON.stringify({image_id: it.image_id, error_class: cls, annotator: "web"})});
  if (!r.ok) { alert("annotation failed: " + (await r.text())); return; }
  it.annotation = await r.json();
  if (pos < queue.length - 1) pos++;
  show(); refresh();
}
document.querySelectorAll("button[data-c]").forEach(b => b.onclick = () => annotate(b.dataset.c));
document.getElementById("back").onclick = () => { if (pos > 0) { pos--; show(); } };
document.getElementById("fwd").onclick = () => { if (pos < queue.length - 1) { pos++; show(); } };
document.addEventListener("keydown", e => { const k = Number(e.key); if (k >= 1 && k <= 5 && queue.length) annotate(order[k - 1]); });
load();
</script>
</body>
</html>
"#;
