public class Run08 {
    public static void main(String[] args) {
        int v = 55;
        String s = String.valueOf(v);
        String t = s + "!";
        System.out.println(t);
    }
}
