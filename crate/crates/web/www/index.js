import init, { segment, filter, session } from "./pkg/segfilter_web.js";

const $ = (id) => document.getElementById(id);

$("page").value = `<!DOCTYPE html>
<html><body>
<h1>Weekend picks</h1>
<div><p>The science museum opens a new animals hall for school groups.</p></div>
<div><p>Big jackpot tonight at the online casino. Poker tables open.</p></div>
<ul>
  <li><a href="/reading/club">Reading club</a> meets on Friday.</li>
  <li>Fun night out: <a href="/casino/offers">see offers</a> and music.</li>
</ul>
</body></html>`;

$("profile").value = JSON.stringify({
  like: ["animals", "music", "reading", "school", "science"],
  unlike: ["casino", "gambling", "poker"],
  threshold: 0,
}, null, 2);

function show(text, isError = false) {
  $("out").textContent = text;
  $("out").className = isError ? "error" : "";
}

function guarded(fn) {
  return () => {
    try {
      fn();
    } catch (e) {
      show(String(e.message ?? e), true);
      $("status").textContent = "";
    }
  };
}

$("segment").onclick = guarded(() => {
  const segs = JSON.parse(segment($("page").value));
  $("status").textContent = `${segs.length} segments`;
  show(segs.map((s) => `#${s.index}  density ${s.density.toFixed(2)}\n  ${s.text_tokens.join(" ")}`).join("\n\n"));
  $("preview").srcdoc = $("page").value;
});

$("filter").onclick = guarded(() => {
  const res = JSON.parse(filter($("page").value, $("profile").value, $("mode").value));
  $("status").textContent = `${res.blocked} of ${res.report.length} segments blocked`;
  show(res.report.map((r) => `#${r.index}  ${r.disposition.padEnd(8)} total ${r.total}`).join("\n"));
  $("preview").srcdoc = res.html;
});

$("metrics").onclick = guarded(() => {
  const pages = $("counts").value.trim().split("\n").map((line, i) => {
    const [s, f, fp, fn] = line.trim().split(/\s+/).map(Number);
    return { page_id: `page${i + 1}`, segment_count: s, filtered_count: f, false_positives: fp, false_negatives: fn };
  });
  const row = JSON.parse(session(JSON.stringify({ id: "demo", pages })));
  $("metrics-out").innerHTML =
    "<tr><th>MSC</th><th>MFSC</th><th>MFP</th><th>MFN</th><th>Accuracy %</th></tr>" +
    `<tr><td>${row.msc.toFixed(2)}</td><td>${row.mfsc.toFixed(2)}</td><td>${row.mfp.toFixed(2)}</td>` +
    `<td>${row.mfn.toFixed(2)}</td><td>${row.accuracy_percent.toFixed(3)}</td></tr>`;
});

await init();
