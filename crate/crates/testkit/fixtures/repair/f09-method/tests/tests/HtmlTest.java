package tests;

public class HtmlTest {
    public static boolean plain() {
        return app.Html.render("hi").equals("<p>hi</p>");
    }

    public static boolean markupEscaped() {
        return app.Html.render("<b>").equals("<p>&lt;b&gt;</p>");
    }
}
