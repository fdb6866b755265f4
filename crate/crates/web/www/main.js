import init, { example_config, runScenario, gainReport, relaxationFigure } from "./pkg/fracsmo_web.js";

const $ = (id) => document.getElementById(id);

function showError(err) {
  $("status").textContent = err ? String(err.message ?? err) : "";
}

function runScenarioClicked() {
  showError(null);
  $("summary").textContent = "Running…";
  // let the status text paint before the synchronous run
  setTimeout(() => {
    try {
      const horizon = parseFloat($("horizon").value) || 0;
      const result = runScenario($("config").value, horizon);
      $("summary").textContent = result.summary();
      const box = $("figures");
      box.innerHTML = "";
      for (let i = 0; i < result.figure_count(); i++) {
        const div = document.createElement("div");
        div.innerHTML = result.figure_svg(i);
        div.title = result.figure_name(i);
        box.appendChild(div);
      }
      result.free();
    } catch (err) {
      $("summary").textContent = "";
      showError(err);
    }
  }, 10);
}

function gainsClicked() {
  showError(null);
  try {
    $("summary").textContent = gainReport($("config").value);
  } catch (err) {
    showError(err);
  }
}

function updateRelaxation() {
  const alpha = parseFloat($("ml-alpha").value);
  $("ml-alpha-value").textContent = alpha.toFixed(2);
  try {
    $("ml-figure").innerHTML =
      "<div>" + relaxationFigure(alpha, parseFloat($("ml-step").value), parseFloat($("ml-horizon").value)) + "</div>";
  } catch (err) {
    $("ml-figure").textContent = String(err.message ?? err);
  }
}

await init();
$("config").value = example_config();
$("summary").textContent = "Ready.";
$("run").addEventListener("click", runScenarioClicked);
$("gains").addEventListener("click", gainsClicked);
$("reset").addEventListener("click", () => { $("config").value = example_config(); });
for (const id of ["ml-alpha", "ml-step", "ml-horizon"]) {
  $(id).addEventListener("input", updateRelaxation);
}
updateRelaxation();
