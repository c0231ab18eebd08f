import init, { Explorer, planarMetric } from "./pkg/gaugelens_web.js";

const $ = (id) => document.getElementById(id);
const fmt = (x) => (Math.abs(x) < 1e-3 && x !== 0 ? x.toExponential(2) : x.toFixed(4));

function rows(table, pairs) {
  table.innerHTML = pairs.map(([k, v]) => `<tr><td>${k}</td><td>${fmt(v)}</td></tr>`).join("");
}

function clear(cv) {
  const g = cv.getContext("2d");
  g.clearRect(0, 0, cv.width, cv.height);
  return g;
}

function drawScatter(cv, pairs) {
  const g = clear(cv);
  const w = cv.width, h = cv.height;
  const px = (c) => ((c + 1) / 2) * w;
  const py = (c) => h - ((c + 1) / 2) * h;
  g.strokeStyle = "#bbb";
  g.beginPath(); g.moveTo(0, h); g.lineTo(w, 0); g.stroke();
  g.fillStyle = "rgba(30,90,200,0.35)";
  for (let i = 0; i < pairs.length; i += 2) g.fillRect(px(pairs[i]) - 1, py(pairs[i + 1]) - 1, 2, 2);
  g.fillStyle = "#333";
  g.fillText("cos before →", w - 75, h - 4);
  g.fillText("cos after ↑", 4, 12);
}

function drawHist(cv, before, after) {
  const g = clear(cv);
  const w = cv.width, h = cv.height - 14;
  const top = Math.max(...before, ...after, 1);
  const bw = w / before.length;
  [[before, "rgba(120,120,120,0.5)"], [after, "rgba(220,80,40,0.55)"]].forEach(([bins, color]) => {
    g.fillStyle = color;
    bins.forEach((c, i) => {
      const bh = (c / top) * h;
      g.fillRect(i * bw, h - bh, bw - 1, bh);
    });
  });
  g.fillStyle = "#333";
  g.fillText("-1", 2, h + 12);
  g.fillText("1", w - 8, h + 12);
  g.fillText("grey: before   orange: after", w / 2 - 70, 12);
}

function drawPlane(cv, out, u, v) {
  const g = clear(cv);
  const c = cv.width / 2, s = cv.width * 0.4;
  const arrow = (x, y, color) => {
    g.strokeStyle = color; g.lineWidth = 2;
    g.beginPath(); g.moveTo(c, c); g.lineTo(c + x * s, c - y * s); g.stroke();
  };
  g.strokeStyle = "#eee";
  g.beginPath(); g.arc(c, c, s, 0, 2 * Math.PI); g.stroke();
  arrow(Math.cos(u), Math.sin(u), "#9ab");
  arrow(Math.cos(v), Math.sin(v), "#9ab");
  arrow(out[3], out[4], "#1a5ac8");
  arrow(out[5], out[6], "#d2502a");
}

function drawSpectrum(cv, before, after) {
  const g = clear(cv);
  const w = cv.width, h = cv.height - 16;
  const all = [...before, ...after].filter((x) => x > 0);
  const lo = Math.log10(Math.min(...all)), hi = Math.log10(Math.max(...all));
  const span = Math.max(hi - lo, 1e-9);
  const y = (x) => h - ((Math.log10(Math.max(x, 1e-300)) - lo) / span) * (h - 10);
  const xs = (i) => 20 + (i / Math.max(before.length - 1, 1)) * (w - 40);
  [[before, "#777"], [after, "#1a5ac8"]].forEach(([vals, color]) => {
    g.strokeStyle = color; g.lineWidth = 2;
    g.beginPath();
    vals.forEach((x, i) => (i ? g.lineTo(xs(i), y(x)) : g.moveTo(xs(i), y(x))));
    g.stroke();
  });
  g.fillStyle = "#333";
  g.fillText(`log10 λ from ${lo.toFixed(1)} to ${hi.toFixed(1)}`, 20, h + 12);
  g.fillText("grey: gauged   blue: whitened", w - 180, 12);
}

async function main() {
  await init();
  $("status").textContent = "training model…";
  await new Promise((r) => setTimeout(r, 0));
  const ex = new Explorer(0);
  $("status").textContent = `model ready: test accuracy ${fmt(ex.accuracy)} on ${ex.testSize} samples`;

  const gauge = () => {
    const kappa = 10 ** Number($("kappa").value);
    $("kappa-out").textContent = kappa.toFixed(2);
    const kind = $("kind").value;
    try {
      const r = ex.applyGauge(kind === "orthogonal" ? 1 : kappa, kind, Number($("seed").value));
      drawScatter($("scatter"), r.pairs);
      drawHist($("hist"), r.histBefore, r.histAfter);
      rows($("metrics"), [
        ["mean |Δcos|", r.meanAbsDcos], ["max |Δcos|", r.maxAbsDcos],
        ["Jaccard@10", r.jaccard], ["top-1 flip rate", r.flip],
        ["prediction agreement", r.agreement], ["max logit diff", r.maxLogitDiff],
        ["linear CKA", r.cka], ["SVCCA", r.svcca], ["canonical cosine residual", r.canonicalResidual],
      ]);
    } catch (e) {
      $("metrics").textContent = String(e);
    }
  };

  const plane = () => {
    const u = Number($("u").value), v = Number($("v").value);
    const out = planarMetric(u, v, 10 ** Number($("pk").value), Number($("rot").value));
    drawPlane($("plane"), out, u, v);
    rows($("plane-out"), [
      ["cos(u, v)", out[0]], ["cos(Du, Dv)", out[1]], ["metric cosine under DᵀD", out[2]], ["cond(D)", out[7]],
    ]);
  };

  const spectrum = () => {
    const kappa = 10 ** Number($("wk").value);
    $("wk-out").textContent = kappa.toFixed(1);
    const s = ex.whiteningSpectrum(kappa, 0);
    drawSpectrum($("spectrum"), s.before, s.after);
    $("spectrum-out").textContent = `mean |λ − 1| after whitening: ${fmt(s.meanAbsDev)}`;
  };

  ["kappa", "kind", "seed"].forEach((id) => $(id).addEventListener("input", gauge));
  ["u", "v", "pk", "rot"].forEach((id) => $(id).addEventListener("input", plane));
  $("wk").addEventListener("input", spectrum);
  gauge(); plane(); spectrum();
}

main().catch((e) => ($("status").textContent = `error: ${e}`));
