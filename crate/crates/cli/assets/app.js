// Browser runner: fetches a plan, runs the ring task with typing between
// clicks, and uploads the session as .ksi.jsonl.
"use strict";

const PARTS = ["hand", "wrist", "forearm", "elbow", "upper_arm", "shoulder"];
const W = 1366, H = 768;
const $ = (id) => document.getElementById(id);

let plan = null, events = [], t0 = 0, queue = [], current = null, phase = "idle";
let baseline = null, word = "", typed = "";

function now() { return (performance.now() - t0) / 1000; }
function push(kind, fields) { events.push(Object.assign({ kind, t: now() }, fields)); }

function buildSurvey() {
  $("survey").innerHTML = PARTS.map((p) =>
    `<label>${p} <input type="range" min="0" max="10" step="0.5" value="0" data-part="${p}"> <span></span></label>`).join("");
  for (const r of $("survey").querySelectorAll("input")) {
    r.oninput = () => { r.nextElementSibling.textContent = r.value; };
    r.oninput();
  }
}

function readSurvey(phaseName) {
  return { kind: "survey", phase: phaseName,
    ratings: [...$("survey").querySelectorAll("input")].map((r) => Number(r.value)) };
}

function logical(ev) {
  const rect = $("canvas").getBoundingClientRect();
  return { x: (ev.clientX - rect.left) * W / rect.width, y: (ev.clientY - rect.top) * H / rect.height };
}

function draw() {
  const ctx = $("canvas").getContext("2d");
  ctx.clearRect(0, 0, W, H);
  if (phase === "click" && current) {
    ctx.fillStyle = "#c33";
    ctx.beginPath();
    ctx.arc(current.target.cx, current.target.cy, current.w / 2, 0, 2 * Math.PI);
    ctx.fill();
  }
  $("word").textContent = phase === "type" ? `${word}  [${typed}]` : "";
}

function fitCanvas() {
  const s = Math.min(window.innerWidth / W, window.innerHeight / H);
  $("canvas").style.width = `${W * s}px`;
  $("canvas").style.height = `${H * s}px`;
}

function nextTarget() {
  current = queue.shift();
  if (!current) return finish();
  phase = "click";
  push("target_shown", { target_index: current.index, cx: current.target.cx, cy: current.target.cy, w: current.w });
  draw();
}

function onMove(ev) {
  if (phase === "idle" || phase === "done") return;
  const p = logical(ev);
  push("pointer_sample", { x: p.x, y: p.y });
}

function onClick(ev) {
  if (phase !== "click") return;
  const p = logical(ev);
  push("click", { x: p.x, y: p.y });
  const dx = p.x - current.target.cx, dy = p.y - current.target.cy;
  if (Math.hypot(dx, dy) > current.w / 2) return;
  if (current.word) {
    word = current.word; typed = "";
    phase = "type";
    push("word_shown", { word });
    draw();
  } else {
    nextTarget();
  }
}

function onKey(ev) {
  if (phase !== "type") return;
  ev.preventDefault();
  let key = null, ch = null;
  if (ev.key === "Backspace") { key = "backspace"; ch = "\b"; typed = typed.slice(0, -1); }
  else if (ev.key === " ") { key = "space"; ch = " "; }
  else if (ev.key.length === 1) { key = ev.key; ch = ev.key; typed += ev.key; }
  if (!key) return;
  push("key_down", { key, hand: "untracked" });
  push("char_typed", { char: ch });
  push("key_up", { key });
  if (typed === word) nextTarget();
  else draw();
}

function finish() {
  phase = "done";
  $("stage").style.display = "none";
  $("survey-title").textContent = "Discomfort after this device";
  buildSurvey();
  $("start").textContent = "Upload";
  $("start").onclick = upload;
}

async function upload() {
  const meta = { kind: "meta", version: 1, participant_id: $("pid").value, device: plan.device,
    cohort: $("cohort").value, block_count: plan.blocks.length, screen_w: W, screen_h: H, seed: plan.seed };
  const lines = [meta, ...events, baseline, readSurvey("post_device")].map((r) => JSON.stringify(r));
  const res = await fetch("/session", { method: "POST", body: lines.join("\n") + "\n" });
  const body = await res.json();
  $("status").textContent = res.ok ? `stored ${body.stored}` : `rejected: ${JSON.stringify(body)}`;
}

async function start() {
  baseline = readSurvey("baseline");
  const res = await fetch(`/plan?device=${$("device").value}`);
  plan = await res.json();
  queue = [];
  for (const block of plan.blocks) {
    for (const set of block.sets) {
      set.targets.forEach((target, i) => queue.push({ index: i, target, w: set.width, word: set.words[i] }));
    }
  }
  events = [];
  t0 = performance.now();
  $("stage").style.display = "block";
  fitCanvas();
  nextTarget();
}

document.addEventListener("visibilitychange", () => {
  if (document.hidden && phase !== "idle" && phase !== "done") $("status").textContent = "session invalid: tab lost focus";
});
window.addEventListener("resize", fitCanvas);
$("canvas").addEventListener("pointermove", onMove);
$("canvas").addEventListener("pointerdown", onClick);
window.addEventListener("keydown", onKey);
$("start").onclick = start;
buildSurvey();
