import init, { listProblems, solveProblem, compareMethods, certifySweep } from "./pkg/fredholm_wasm_demo.js";

const $ = (id) => document.getElementById(id);
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

// Minimal line plot. series: [{xs, ys, label, color, dash}]
function plot(canvas, series, { logX = false, logY = false, title = "", hline = null } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  const pad = { l: 62, r: 14, t: 26, b: 34 };
  ctx.clearRect(0, 0, W, H);
  const tx = (v) => (logX ? Math.log10(v) : v);
  const ty = (v) => (logY ? Math.log10(Math.max(v, 1e-17)) : v);

  const pts = series.flatMap((s) => s.xs.map((x, i) => [tx(x), ty(s.ys[i])])).filter(([a, b]) => isFinite(a) && isFinite(b));
  if (hline !== null) pts.push([pts.length ? pts[0][0] : 0, ty(hline)]);
  if (!pts.length) return;
  let [x0, x1] = [Math.min(...pts.map((p) => p[0])), Math.max(...pts.map((p) => p[0]))];
  let [y0, y1] = [Math.min(...pts.map((p) => p[1])), Math.max(...pts.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) { y0 -= 0.5; y1 += 0.5; }
  const my = 0.05 * (y1 - y0); y0 -= my; y1 += my;
  const px = (x) => pad.l + ((tx(x) - x0) / (x1 - x0)) * (W - pad.l - pad.r);
  const py = (y) => H - pad.b - ((ty(y) - y0) / (y1 - y0)) * (H - pad.t - pad.b);

  ctx.strokeStyle = "#999"; ctx.lineWidth = 1;
  ctx.strokeRect(pad.l, pad.t, W - pad.l - pad.r, H - pad.t - pad.b);
  ctx.fillStyle = "#333"; ctx.font = "11px sans-serif";
  for (let k = 0; k <= 4; k++) {
    const yv = y0 + (k / 4) * (y1 - y0), xv = x0 + (k / 4) * (x1 - x0);
    const ylab = logY ? `1e${yv.toFixed(1)}` : yv.toPrecision(3);
    const xlab = logX ? `1e${xv.toFixed(1)}` : xv.toPrecision(3);
    ctx.fillText(ylab, 4, H - pad.b - (k / 4) * (H - pad.t - pad.b) + 4);
    ctx.fillText(xlab, pad.l + (k / 4) * (W - pad.l - pad.r) - 12, H - pad.b + 16);
  }
  ctx.font = "12px sans-serif";
  ctx.fillText(title, pad.l, 16);

  if (hline !== null) {
    ctx.setLineDash([4, 4]); ctx.strokeStyle = "#888";
    ctx.beginPath(); ctx.moveTo(pad.l, py(hline)); ctx.lineTo(W - pad.r, py(hline)); ctx.stroke();
    ctx.setLineDash([]);
  }
  series.forEach((s, k) => {
    ctx.strokeStyle = s.color || COLORS[k % COLORS.length];
    ctx.lineWidth = 1.6;
    ctx.setLineDash(s.dash || []);
    ctx.beginPath();
    let started = false;
    s.xs.forEach((x, i) => {
      const y = s.ys[i];
      if (y === null || y === undefined || !isFinite(ty(y))) return;
      if (!started) { ctx.moveTo(px(x), py(y)); started = true; } else ctx.lineTo(px(x), py(y));
    });
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(s.label, W - pad.r - 150, pad.t + 16 + 15 * k);
  });
}

const num = (id) => Number($(id).value);
const problem = () => $("problem").value;
let solved = null;

function call(f, status) {
  try {
    const out = JSON.parse(f());
    $(status).classList.remove("err");
    return out;
  } catch (e) {
    $(status).textContent = String(e);
    $(status).classList.add("err");
    return null;
  }
}

function drawIterate() {
  if (!solved) return;
  const n = Math.min(Number($("iter").value), solved.iterates.length - 1);
  $("iter-label").textContent = n;
  const series = [{ xs: solved.xs, ys: solved.iterates[n], label: `u_${n}` }];
  if (solved.exact) series.push({ xs: solved.xs, ys: solved.exact, label: "exact", dash: [5, 4], color: "#555" });
  plot($("solution"), series, { title: `${solved.problem}: iterate u_${n}` });
}

function runSolve() {
  const v = call(() => solveProblem(problem(), $("method").value, num("order"), num("initial"), num("maxiter"), 201), "solve-status");
  if (!v) return;
  solved = v;
  const slider = $("iter");
  slider.max = v.iterates.length - 1;
  slider.value = Math.min(3, v.iterates.length - 1);
  drawIterate();
  const its = v.residual_history.map((_, i) => i);
  const hist = [{ xs: its, ys: v.residual_history, label: "sup |F(u_n)|" }];
  if (v.error_history) hist.push({ xs: its, ys: v.error_history, label: "sup |u_n - p|" });
  plot($("history"), hist, { logY: true, title: "nodal residual and error" });
  const ratios = v.error_history
    ? v.error_history.slice(1).map((e, i) => e / v.error_history[i]).filter((_, i) => v.error_history[i] > 1e-13)
    : [];
  $("solve-status").textContent =
    (v.converged ? `converged in ${v.iterations} iterations` : `stopped after ${v.iterations} iterations: ${v.failure}`) +
    (ratios.length ? `\nerror ratios e[n+1]/e[n]: ${ratios.map((r) => r.toFixed(3)).join(", ")}` : "");
}

function runCompare() {
  const v = call(() => compareMethods(problem(), num("order"), num("initial"), num("maxiter")), "compare-status");
  if (!v) return;
  const its = (h) => h.residual_history.map((_, i) => i);
  plot(
    $("compare"),
    [
      { xs: its(v.newton), ys: v.newton.residual_history, label: "newton-type residual" },
      { xs: its(v.picard), ys: v.picard.residual_history, label: "picard residual" },
    ],
    { logY: true, title: "sup-node residual per iteration" },
  );
  const line = (name, h) => `${name}: ${h.converged ? `converged in ${h.iterations} iterations` : `failed (${h.failure})`}`;
  $("compare-status").textContent = `${line("newton-type", v.newton)}\n${line("picard", v.picard)}`;
}

function runCertify() {
  const v = call(() => certifySweep(problem(), num("rmin"), num("rmax"), num("rsteps"), num("samples"), num("seed")), "certify-status");
  if (!v) return;
  const r = v.points.map((p) => p.radius);
  plot(
    $("contraction"),
    [
      { xs: r, ys: v.points.map((p) => p.sup_lipschitz), label: "sampled Lipschitz of H1" },
      { xs: r, ys: v.points.map((p) => p.sup_directional), label: "|dH1 in direction 1|" },
    ],
    { logX: true, title: "contraction estimates vs ball radius (dashed: 1/2)", hline: 0.5 },
  );
  $("certify-status").textContent = v.points
    .map((p) => `r=${p.radius.toExponential(2)}  lipschitz=${p.sup_lipschitz.toFixed(4)}  directional=${p.sup_directional.toExponential(2)}  excluded=${p.excluded}`)
    .join("\n");
}

function refreshAll() {
  const info = problems.find((p) => p.name === problem());
  $("problem-desc").textContent = info ? `λ = ${info.lambda}; exact ${info.exact ?? "unknown"}; ${info.description}` : "";
  runSolve();
  runCompare();
  runCertify();
}

let problems = [];
await init();
problems = JSON.parse(listProblems());
for (const p of problems) $("problem").add(new Option(p.name, p.name));
$("problem").addEventListener("change", refreshAll);
for (const id of ["method", "order", "initial", "maxiter"]) $(id).addEventListener("change", () => { runSolve(); runCompare(); });
$("iter").addEventListener("input", drawIterate);
$("certify").addEventListener("click", runCertify);
refreshAll();
