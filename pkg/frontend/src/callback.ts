/**
 * Validation-callback payload generator.
 *
 * The returned script is what a test vector executes when a parser quirk
 * fires.  It reports execution to the test driver through four mechanisms,
 * in order: location redirect, cookie set, background HTTP request, image
 * element insertion.  Each runs in its own try block so a sandbox that
 * blocks one (e.g. an iframe that denies window.location access) never
 * silences the others; any single mechanism suffices to mark the test PASS.
 */

export function validationUrl(
  token: string,
  testIndex: number,
  mechanism: string,
  base = "",
): string {
  return `${base}/v/${token}/${testIndex}/${mechanism}`;
}

export function cookieName(token: string, testIndex: number): string {
  return `qp_${token}_${testIndex}`;
}

export function callbackPayload(
  token: string,
  testIndex: number,
  base = "",
): string {
  const locationUrl = validationUrl(token, testIndex, "location_redirect", base);
  const xhrUrl = validationUrl(token, testIndex, "xhr", base);
  const imgUrl = validationUrl(token, testIndex, "img_beacon", base);
  const cookie = `${cookieName(token, testIndex)}=1; path=/`;
  return (
    "(function(){" +
    `try{window.location="${locationUrl}";}catch(e){}` +
    `try{document.cookie="${cookie}";}catch(e){}` +
    `try{var x=new XMLHttpRequest();x.open("GET","${xhrUrl}",true);x.send();}catch(e){}` +
    `try{var i=new Image();i.src="${imgUrl}";` +
    "if(document.body){document.body.appendChild(i);}}catch(e){}" +
    "})();"
  );
}
