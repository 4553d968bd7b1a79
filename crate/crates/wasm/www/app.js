import init, { curvature_curves, branch_point, simulate } from "./pkg/filament_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function report(el, err) {
  el.textContent = String(err);
  el.className = "error";
}

function plotCurves() {
  const canvas = $("curves");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  let rows;
  try {
    rows = curvature_curves(num("c-min"), num("c-max"), 400);
  } catch (e) {
    report($("status"), e);
    return;
  }
  const xs = [], printed = [], physical = [];
  for (let i = 0; i < rows.length; i += 3) {
    xs.push(rows[i]);
    printed.push(rows[i + 1]);
    physical.push(rows[i + 2]);
  }
  const all = printed.concat(physical);
  const lo = Math.min(0, ...all), hi = Math.max(0, ...all);
  const pad = 40;
  const sx = (x) => pad + (x - xs[0]) / (xs[xs.length - 1] - xs[0]) * (canvas.width - 2 * pad);
  const sy = (y) => canvas.height - pad - (y - lo) / (hi - lo) * (canvas.height - 2 * pad);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, sy(0));
  ctx.lineTo(canvas.width - pad, sy(0));
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "12px system-ui";
  ctx.fillText(`ω = ${xs[0]}`, pad, canvas.height - 10);
  ctx.fillText(`ω = ${xs[xs.length - 1]}`, canvas.width - pad - 60, canvas.height - 10);
  ctx.fillText(hi.toFixed(3), 2, sy(hi) + 4);
  ctx.fillText(lo.toFixed(3), 2, sy(lo));
  for (const [ys, color] of [[printed, "#c33"], [physical, "#36c"]]) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ys.forEach((y, i) => (i ? ctx.lineTo(sx(xs[i]), sy(y)) : ctx.moveTo(sx(xs[i]), sy(y))));
    ctx.stroke();
  }
}

function solvePoint() {
  const out = $("b-out");
  out.className = "";
  out.textContent = "solving…";
  // let the message paint before the synchronous solve
  setTimeout(() => {
    try {
      const t0 = performance.now();
      const p = JSON.parse(branch_point(num("b-omega"), num("b-r"), Number($("b-stages").value)));
      const ms = (performance.now() - t0).toFixed(0);
      out.textContent = p.excised
        ? `excised by resonance (j, k, stage) = (${p.excision.join(", ")})`
        : [
            `Ω₀         = ${p.big_omega0.toFixed(12)}`,
            `Ω(r)       = ${p.big_omega.toFixed(12)}`,
            `Ω₀ + Ω₂r²  = ${p.predicted.toFixed(12)}`,
            `difference = ${(p.big_omega - p.predicted).toExponential(3)}`,
            `residual   = ${p.residual.toExponential(3)}`,
            `‖w‖        = ${p.w_norm.toExponential(3)}`,
            `time       = ${ms} ms`,
          ].join("\n");
    } catch (e) {
      report(out, e);
    }
  }, 10);
}

let animation = null;

function runSimulation() {
  const info = $("s-info");
  info.className = "";
  info.textContent = "integrating…";
  if (animation) cancelAnimationFrame(animation);
  setTimeout(() => {
    let v;
    try {
      v = simulate(num("s-n"), num("s-r"), num("s-modes"), 2000, 120);
    } catch (e) {
      report(info, e);
      return;
    }
    const [count, samples, frames, period] = [v[0], v[1], v[2], v[3]];
    const stride = 1 + 2 * count + 2 * count * samples;
    info.textContent = `${count} filaments, period ${period.toFixed(6)}, ${frames} frames`;
    let maxDisp = 1e-12;
    for (let f = 0; f < frames; f++) {
      const base = 4 + f * stride + 1 + 2 * count;
      for (let i = 0; i < count * samples; i++) {
        maxDisp = Math.max(maxDisp, Math.abs(Math.hypot(v[base + 2 * i], v[base + 2 * i + 1]) - 1));
      }
    }
    const canvas = $("anim");
    const ctx = canvas.getContext("2d");
    const colors = ["#c33", "#36c", "#393", "#c90", "#939", "#399", "#666", "#963"];
    let f = 0;
    const draw = () => {
      const base = 4 + f * stride;
      const t = v[base];
      ctx.clearRect(0, 0, canvas.width, canvas.height);
      // cross-section in the frame co-rotating with the first filament
      const cx = 180, cy = 180, scale = 120;
      ctx.strokeStyle = "#ddd";
      ctx.beginPath();
      ctx.arc(cx, cy, scale, 0, 2 * Math.PI);
      ctx.stroke();
      const frameAngle = Math.atan2(v[base + 2], v[base + 1]);
      for (let j = 0; j < count; j++) {
        const x = v[base + 1 + 2 * j], y = v[base + 2 + 2 * j];
        const a = Math.atan2(y, x) - frameAngle;
        const rho = Math.hypot(x, y);
        ctx.fillStyle = colors[j % colors.length];
        ctx.beginPath();
        ctx.arc(cx + scale * rho * Math.cos(a), cy - scale * rho * Math.sin(a), 6, 0, 2 * Math.PI);
        ctx.fill();
      }
      // displacement profiles along s
      const px = 400, pw = 480, py = 180, ph = 150;
      ctx.strokeStyle = "#999";
      ctx.beginPath();
      ctx.moveTo(px, py);
      ctx.lineTo(px + pw, py);
      ctx.stroke();
      for (let j = 0; j < count; j++) {
        ctx.strokeStyle = colors[j % colors.length];
        ctx.lineWidth = 2;
        ctx.beginPath();
        for (let i = 0; i <= samples; i++) {
          const k = base + 1 + 2 * count + 2 * (j * samples + (i % samples));
          const d = Math.hypot(v[k], v[k + 1]) - 1;
          const X = px + (pw * i) / samples, Y = py - (ph * d) / maxDisp;
          i ? ctx.lineTo(X, Y) : ctx.moveTo(X, Y);
        }
        ctx.stroke();
      }
      ctx.fillStyle = "#555";
      ctx.font = "12px system-ui";
      ctx.fillText(`t/T = ${(t / period).toFixed(3)}`, 10, 20);
      ctx.fillText(`±${maxDisp.toExponential(2)}`, px, py - ph - 5);
      ctx.fillText("s = 0", px, py + ph + 15);
      ctx.fillText("s = 2π", px + pw - 35, py + ph + 15);
      f = (f + 1) % frames;
      animation = requestAnimationFrame(draw);
    };
    draw();
  }, 10);
}

await init();
$("status").textContent = "Solver loaded.";
$("c-go").onclick = plotCurves;
$("b-go").onclick = solvePoint;
$("s-go").onclick = runSimulation;
plotCurves();
