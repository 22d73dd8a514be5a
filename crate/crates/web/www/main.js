import init, { kernelProfile, gridFit, pgreedy } from "./pkg/prodkern_web.js";

const RES = 160;
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const $ = (id) => document.getElementById(id);

function report(el, f) {
  try {
    el.classList.remove("err");
    f();
  } catch (e) {
    el.classList.add("err");
    el.textContent = String(e.message ?? e);
  }
}

function lineChart(canvas, series, xmin, xmax, logY) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const ty = (v) => (logY ? Math.log10(Math.max(v, 1e-300)) : v);
  const all = series.flatMap((s) => s.y.map(ty)).filter(Number.isFinite);
  let lo = Math.min(...all), hi = Math.max(...all);
  if (hi === lo) hi = lo + 1;
  const px = (x) => 30 + ((x - xmin) / (xmax - xmin)) * (w - 40);
  const py = (v) => h - 20 - ((ty(v) - lo) / (hi - lo)) * (h - 30);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(30, 10, w - 40, h - 30);
  ctx.fillStyle = "#444";
  ctx.fillText(logY ? `1e${hi.toFixed(1)}` : hi.toFixed(2), 2, 14);
  ctx.fillText(logY ? `1e${lo.toFixed(1)}` : lo.toFixed(2), 2, h - 22);
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color ?? COLORS[k % COLORS.length];
    ctx.beginPath();
    s.y.forEach((v, i) => {
      const x = px(s.x[i]), y = py(v);
      i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
    });
    ctx.stroke();
  });
}

function heatmap(canvas, field, res, xs, ys) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  let lo = Infinity, hi = -Infinity;
  for (const v of field) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
  const img = ctx.createImageData(res, res);
  for (let iy = 0; iy < res; iy++) {
    for (let ix = 0; ix < res; ix++) {
      const t = (field[iy * res + ix] - lo) / (hi - lo || 1);
      // Rows are stored with y increasing; the canvas grows downwards.
      const p = 4 * ((res - 1 - iy) * res + ix);
      img.data[p] = 255 * t;
      img.data[p + 1] = 80 + 120 * (1 - Math.abs(2 * t - 1));
      img.data[p + 2] = 255 * (1 - t);
      img.data[p + 3] = 255;
    }
  }
  const off = new OffscreenCanvas(res, res);
  off.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, w, h);
  ctx.fillStyle = "#000";
  for (const x of xs) for (const y of ys) ctx.fillRect(x * (w - 3), (1 - y) * (h - 3), 3, 3);
}

function plotProfiles() {
  report($("pl"), () => {
    const specs = $("pk").value.split(";").map((s) => s.trim()).filter(Boolean);
    const r = Number($("pr").value);
    const n = 401;
    const x = Array.from({ length: n }, (_, i) => -r + (2 * r * i) / (n - 1));
    const series = specs.map((s) => ({ x, y: Array.from(kernelProfile(s, r, n)) }));
    lineChart($("pc"), series, -r, r, false);
    $("pl").innerHTML = specs.map((s, k) => `<span style="color:${COLORS[k % COLORS.length]}">${s}</span>`).join("\n");
  });
}

function runFit() {
  report($("fo"), () => {
    const t0 = performance.now();
    const r = gridFit($("fk1").value, $("fk2").value, Number($("fi").value), Number($("fj").value), RES);
    const ms = performance.now() - t0;
    heatmap($("fc"), r.field, RES, r.xs, r.ys);
    $("fo").textContent =
      `centers  ${r.xs.length} x ${r.ys.length} = ${r.xs.length * r.ys.length}\n` +
      `mse      ${r.mse.toExponential(4)}\n` +
      `cond2    ${r.cond.toExponential(4)}\n` +
      `time     ${ms.toFixed(1)} ms`;
    r.free();
  });
}

function runGreedy() {
  report($("go"), () => {
    const t0 = performance.now();
    const r = pgreedy($("gk1").value, $("gk2").value, Number($("gn").value), Number($("gm").value), RES);
    const ms = performance.now() - t0;
    heatmap($("gc"), r.field, RES, r.xs, r.ys);
    const comps = r.components, sups = r.supPowers;
    const series = [0, 1].map((c) => {
      const x = [], y = [];
      comps.forEach((k, i) => { if (k === c) { x.push(i); y.push(sups[i]); } });
      return { x, y, color: COLORS[c] };
    });
    lineChart($("gt"), series, 0, Math.max(comps.length - 1, 1), true);
    $("go").textContent =
      `steps    ${comps.length}\n` +
      `grid     ${r.xs.length} x ${r.ys.length}\n` +
      `stop     ${r.stop}\n` +
      `mse      ${r.mse.toExponential(4)}\n` +
      `time     ${ms.toFixed(1)} ms\n\n` +
      `sup power per step:\n` +
      `component 0 blue, 1 red`;
    r.free();
  });
}

await init();
$("pgo").onclick = plotProfiles;
$("fgo").onclick = runFit;
$("ggo").onclick = runGreedy;
plotProfiles();
runFit();
runGreedy();
